#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "radpair/error.hpp"

namespace radpair {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

/// Vector spin operator: x, y, z components in units of hbar.
using SpinVector = std::array<Matrix, 3>;

inline constexpr std::size_t default_max_dim = 4096;

/// Nuclear content of a radical pair. The two electrons are implicit.
struct SpinSpec {
  std::vector<double> nuclei;
};

enum class CoherenceMeasure {
  /// ||rho_tilde||_tr / (2 sqrt(<Q_S> <Q_T>)); 1 for every pure S/T superposition.
  trace_norm_ratio,
  /// Tr(rho_tilde^2) / Tr(rho_bar^2); peaks only at equal S/T weight.
  purity_ratio,
};

struct SpinSystem {
  std::size_t dim = 0;
  SpinVector s1;
  SpinVector s2;
  std::vector<SpinVector> nuclear;
  std::vector<double> nuclear_spins;
  Matrix singlet;   // Q_S
  Matrix triplet;   // Q_T
  Matrix identity;
};

struct CoherenceParts {
  Matrix rho_bar;
  Matrix rho_tilde;
};

struct HyperfineCoupling {
  std::size_t electron = 0; // 0 or 1
  std::size_t nucleus = 0;
  double coupling = 0.0;    // isotropic A, angular frequency
};

namespace detail {

inline Matrix kron(const Matrix &a, const Matrix &b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Multiplicity 2I+1 of a spin quantum number, validated as a half-integer.
inline std::size_t multiplicity(double spin) {
  const double twice = 2.0 * spin;
  const double rounded = std::round(twice);
  if (!std::isfinite(spin) || spin < 0.0 || std::abs(twice - rounded) > 1e-12)
    throw ValidationError("spin quantum number must be a non-negative "
                          "half-integer, got " + std::to_string(spin));
  return static_cast<std::size_t>(rounded) + 1;
}

/// Single-spin operators in the |I, m> basis ordered m = I, I-1, ..., -I.
inline SpinVector single_spin_operators(double spin) {
  const auto n = static_cast<Eigen::Index>(multiplicity(spin));
  Matrix raise = Matrix::Zero(n, n);
  Matrix z = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = spin - static_cast<double>(i);
    z(i, i) = m;
    if (i > 0) // <m+1| I+ |m>
      raise(i - 1, i) = std::sqrt(spin * (spin + 1.0) - m * (m + 1.0));
  }
  const Matrix lower = raise.adjoint();
  return {(raise + lower) * 0.5, (raise - lower) * Complex(0.0, -0.5), z};
}

/// Embed a single-factor operator at position `slot` of the tensor product.
inline Matrix embed(const Matrix &op, std::size_t slot,
                    std::span<const std::size_t> dims) {
  Matrix out = Matrix::Identity(1, 1);
  for (std::size_t k = 0; k < dims.size(); ++k) {
    const auto d = static_cast<Eigen::Index>(dims[k]);
    out = kron(out, k == slot ? op : Matrix::Identity(d, d));
  }
  return out;
}

inline double max_abs(const Matrix &m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline void require_dim(const SpinSystem &system, const Matrix &m,
                        const char *what) {
  const auto d = static_cast<Eigen::Index>(system.dim);
  if (m.rows() != d || m.cols() != d)
    throw ValidationError(std::string(what) + " has dimension " +
                          std::to_string(m.rows()) + "x" +
                          std::to_string(m.cols()) + ", system dimension is " +
                          std::to_string(system.dim));
}

} // namespace detail

/// Builds the electron1 (x) electron2 (x) nuclei Hilbert space and caches
/// the singlet/triplet projectors. Q_S = 1/4 - s1.s2.
inline SpinSystem build_system(const SpinSpec &spec,
                               std::size_t max_dim = default_max_dim) {
  std::vector<std::size_t> dims{2, 2};
  std::size_t dim = 4;
  for (double spin : spec.nuclei) {
    const std::size_t m = detail::multiplicity(spin);
    if (dim > max_dim / m)
      throw ValidationError("spin system dimension exceeds cap of " +
                            std::to_string(max_dim));
    dim *= m;
    dims.push_back(m);
  }
  if (dim > max_dim)
    throw ValidationError("spin system dimension exceeds cap of " +
                          std::to_string(max_dim));

  SpinSystem sys;
  sys.dim = dim;
  sys.nuclear_spins = spec.nuclei;
  const SpinVector half = detail::single_spin_operators(0.5);
  for (std::size_t c = 0; c < 3; ++c) {
    sys.s1[c] = detail::embed(half[c], 0, dims);
    sys.s2[c] = detail::embed(half[c], 1, dims);
  }
  for (std::size_t j = 0; j < spec.nuclei.size(); ++j) {
    const SpinVector local = detail::single_spin_operators(spec.nuclei[j]);
    SpinVector op;
    for (std::size_t c = 0; c < 3; ++c)
      op[c] = detail::embed(local[c], j + 2, dims);
    sys.nuclear.push_back(std::move(op));
  }

  const auto d = static_cast<Eigen::Index>(dim);
  sys.identity = Matrix::Identity(d, d);
  Matrix dot = Matrix::Zero(d, d);
  for (std::size_t c = 0; c < 3; ++c)
    dot += sys.s1[c] * sys.s2[c];
  sys.singlet = 0.25 * sys.identity - dot;
  sys.triplet = sys.identity - sys.singlet;
  return sys;
}

/// H = omega1 s1z + omega2 s2z.
inline Matrix zeeman_hamiltonian(const SpinSystem &system, double omega1,
                                 double omega2) {
  return omega1 * system.s1[2] + omega2 * system.s2[2];
}

/// Isotropic hyperfine term sum_ij A_ij s_i . I_j.
inline Matrix hyperfine_hamiltonian(const SpinSystem &system,
                                    std::span<const HyperfineCoupling> couplings) {
  const auto d = static_cast<Eigen::Index>(system.dim);
  Matrix h = Matrix::Zero(d, d);
  for (const auto &c : couplings) {
    if (c.electron > 1)
      throw ValidationError("hyperfine electron index " +
                            std::to_string(c.electron) + " out of range");
    if (c.nucleus >= system.nuclear.size())
      throw ValidationError("hyperfine nucleus index " +
                            std::to_string(c.nucleus) + " out of range");
    const SpinVector &s = c.electron == 0 ? system.s1 : system.s2;
    const SpinVector &n = system.nuclear[c.nucleus];
    for (std::size_t k = 0; k < 3; ++k)
      h += c.coupling * (s[k] * n[k]);
  }
  return h;
}

/// rho = rho_bar + rho_tilde with rho_bar = Q_S rho Q_S + Q_T rho Q_T.
inline CoherenceParts decompose(const SpinSystem &system, const Matrix &rho) {
  detail::require_dim(system, rho, "density matrix");
  const Matrix &qs = system.singlet;
  const Matrix &qt = system.triplet;
  const Matrix rho_qs = rho * qs;
  const Matrix rho_qt = rho * qt;
  return {qs * rho_qs + qt * rho_qt, qs * rho_qt + qt * rho_qs};
}

/// Tr{Q_S rho}, real part.
inline double singlet_population(const SpinSystem &system, const Matrix &rho) {
  return (system.singlet.cwiseProduct(rho.transpose())).sum().real();
}

inline double real_trace(const Matrix &m) { return m.trace().real(); }

/// Sum of singular values of a Hermitian matrix (Hermitian part is used).
inline double hermitian_trace_norm(const Matrix &m) {
  if (m.size() == 0)
    return 0.0;
  const Matrix herm = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(herm, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().sum();
}

/// Singlet-triplet coherence p_coh in [0, 1]. Invariant under rho -> c rho.
inline double coherence_measure(const SpinSystem &system, const Matrix &rho,
                                CoherenceMeasure measure =
                                    CoherenceMeasure::trace_norm_ratio,
                                double trace_floor = 1e-12) {
  detail::require_dim(system, rho, "density matrix");
  const double tr = real_trace(rho);
  if (!(tr > trace_floor))
    throw TraceFloorError("trace " + std::to_string(tr) +
                         " below floor; ensemble fully recombined");
  const CoherenceParts parts = decompose(system, rho);
  // Coherences below roundoff of the trace are treated as absent.
  const double negligible = 1e-14 * tr;

  double p = 0.0;
  switch (measure) {
  case CoherenceMeasure::trace_norm_ratio: {
    const double norm = hermitian_trace_norm(parts.rho_tilde);
    if (norm <= negligible)
      return 0.0;
    const double ps = singlet_population(system, rho);
    const double pt = tr - ps;
    if (ps <= 0.0 || pt <= 0.0)
      return 1.0;
    p = norm / (2.0 * std::sqrt(ps * pt));
    break;
  }
  case CoherenceMeasure::purity_ratio: {
    const double num = parts.rho_tilde.squaredNorm();
    if (num <= negligible * negligible)
      return 0.0;
    const double den = parts.rho_bar.squaredNorm();
    if (den <= 0.0)
      return 1.0;
    p = num / den;
    break;
  }
  }
  return std::clamp(p, 0.0, 1.0);
}

inline constexpr double inv_sqrt2 = 1.0 / std::numbers::sqrt2;

/// Electron-pair kets in the |uu>, |ud>, |du>, |dd> basis.
inline Eigen::VectorXcd singlet_ket() {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(4);
  v(1) = inv_sqrt2;
  v(2) = -inv_sqrt2;
  return v;
}

inline Eigen::VectorXcd triplet_zero_ket() {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(4);
  v(1) = inv_sqrt2;
  v(2) = inv_sqrt2;
  return v;
}

/// Singlet electrons with unpolarized nuclei: Q_S / Tr Q_S.
inline Matrix singlet_density(const SpinSystem &system) {
  return system.singlet / real_trace(system.singlet);
}

inline std::string to_string(CoherenceMeasure m) {
  return m == CoherenceMeasure::trace_norm_ratio ? "trace_norm_ratio"
                                                 : "purity_ratio";
}

inline CoherenceMeasure parse_coherence_measure(const std::string &name) {
  if (name == "trace_norm_ratio")
    return CoherenceMeasure::trace_norm_ratio;
  if (name == "purity_ratio")
    return CoherenceMeasure::purity_ratio;
  throw ValidationError("unknown coherence measure '" + name + "'");
}

} // namespace radpair
