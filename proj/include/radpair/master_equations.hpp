#pragma once

#include <cmath>
#include <string>

#include "radpair/error.hpp"
#include "radpair/spin_hilbert.hpp"

namespace radpair {

enum class ModelKind { jones_hore, kominis, haberkorn };

/// Recombination model. Only the singlet channel reacts (k_T = 0).
struct ModelSpec {
  ModelKind kind = ModelKind::jones_hore;
  double k_s = 1.0;
  double k_sr = 0.0;
  CoherenceMeasure coherence = CoherenceMeasure::trace_norm_ratio;
  /// Absolute floor on Tr rho below which the Kominis terms are undefined.
  double trace_floor = 1e-12;
};

/// Term-by-term split of d rho / dt.
struct RhsBreakdown {
  Matrix unitary;
  Matrix decoherence;
  Matrix reaction;
  Matrix relaxation;
  Matrix total;
};

struct CoherentDecay {
  double predicted_rate = 0.0;
  /// Off-diagonal (S-T) block of d rho / dt with the unitary terms removed.
  Matrix measured;
  Matrix rho_tilde;
};

inline std::string to_string(ModelKind kind) {
  switch (kind) {
  case ModelKind::jones_hore:
    return "jh";
  case ModelKind::kominis:
    return "kominis";
  case ModelKind::haberkorn:
    return "haberkorn";
  }
  return "?";
}

inline ModelKind parse_model_kind(const std::string &name) {
  if (name == "jh" || name == "jones_hore" || name == "JonesHore")
    return ModelKind::jones_hore;
  if (name == "kominis" || name == "Kominis")
    return ModelKind::kominis;
  if (name == "haberkorn" || name == "Haberkorn")
    return ModelKind::haberkorn;
  throw ValidationError("unknown model '" + name +
                        "' (expected jh, kominis or haberkorn)");
}

inline void validate(const ModelSpec &spec) {
#ifdef RADPAIR_ALLOW_UNITARY_ONLY
  const bool rate_ok = spec.k_s >= 0.0;
#else
  const bool rate_ok = spec.k_s > 0.0;
#endif
  if (!std::isfinite(spec.k_s) || !rate_ok)
    throw ValidationError("k_S must be positive, got " +
                          std::to_string(spec.k_s));
  if (!std::isfinite(spec.k_sr) || spec.k_sr < 0.0)
    throw ValidationError("k_sr must be non-negative, got " +
                          std::to_string(spec.k_sr));
  if (!(spec.trace_floor >= 0.0))
    throw ValidationError("trace floor must be non-negative");
}

namespace detail {

inline void require_hermitian(const Matrix &h) {
  const double asym = max_abs(h - h.adjoint());
  if (asym > 1e-10)
    throw ValidationError("Hamiltonian is not Hermitian (max asymmetry " +
                          std::to_string(asym) + ")");
}

inline void require_kind(const ModelSpec &spec, ModelKind kind) {
  if (spec.kind != kind)
    throw ValidationError("model spec is " + to_string(spec.kind) +
                          ", expected " + to_string(kind));
}

inline Matrix unitary_term(const Matrix &h, const Matrix &rho) {
  return Complex(0.0, -1.0) * (h * rho - rho * h);
}

/// Q_S rho + rho Q_S - 2 Q_S rho Q_S.
inline Matrix singlet_lindblad(const Matrix &qs_rho, const Matrix &rho_qs,
                               const Matrix &qs_rho_qs) {
  return qs_rho + rho_qs - 2.0 * qs_rho_qs;
}

inline RhsBreakdown finish(RhsBreakdown out) {
  out.total = out.unitary + out.decoherence + out.reaction + out.relaxation;
  return out;
}

} // namespace detail

/// Trace-preserving S/T dephasing at rate k_sr: -2 k_sr rho_tilde.
inline Matrix relaxation_rhs(const SpinSystem &system, const Matrix &rho,
                             double k_sr) {
  detail::require_dim(system, rho, "density matrix");
  if (!std::isfinite(k_sr) || k_sr < 0.0)
    throw ValidationError("k_sr must be non-negative, got " +
                          std::to_string(k_sr));
  const auto d = static_cast<Eigen::Index>(system.dim);
  if (k_sr == 0.0)
    return Matrix::Zero(d, d);
  return -2.0 * k_sr * decompose(system, rho).rho_tilde;
}

/// d rho/dt = -i[H, rho] - k_S (rho - Q_T rho Q_T), split as
/// decoherence -k_S(Q_S rho + rho Q_S - 2 Q_S rho Q_S) plus
/// reaction -k_S Q_S rho Q_S.
inline RhsBreakdown jones_hore_rhs(const SpinSystem &system, const Matrix &h,
                                   const Matrix &rho, const ModelSpec &spec) {
  detail::require_kind(spec, ModelKind::jones_hore);
  detail::require_dim(system, h, "Hamiltonian");
  detail::require_dim(system, rho, "density matrix");
  detail::require_hermitian(h);
  const Matrix &qs = system.singlet;
  const Matrix qs_rho = qs * rho;
  const Matrix rho_qs = rho * qs;
  const Matrix qs_rho_qs = qs_rho * qs;

  RhsBreakdown out;
  out.unitary = detail::unitary_term(h, rho);
  out.decoherence = -spec.k_s * detail::singlet_lindblad(qs_rho, rho_qs, qs_rho_qs);
  out.reaction = -spec.k_s * qs_rho_qs;
  out.relaxation = relaxation_rhs(system, rho, spec.k_sr);
  return detail::finish(std::move(out));
}

/// Kominis master equation. Nonlinear in rho through p_coh and rho / Tr rho;
/// p_coh is recomputed on every call.
inline RhsBreakdown kominis_rhs(const SpinSystem &system, const Matrix &h,
                                const Matrix &rho, const ModelSpec &spec) {
  detail::require_kind(spec, ModelKind::kominis);
  detail::require_dim(system, h, "Hamiltonian");
  detail::require_dim(system, rho, "density matrix");
  detail::require_hermitian(h);
  const double p_coh =
      coherence_measure(system, rho, spec.coherence, spec.trace_floor);
  const double tr = real_trace(rho);
  const Matrix &qs = system.singlet;
  const Matrix qs_rho = qs * rho;
  const Matrix rho_qs = rho * qs;
  const Matrix qs_rho_qs = qs_rho * qs;
  const double singlet = qs_rho.trace().real();

  RhsBreakdown out;
  out.unitary = detail::unitary_term(h, rho);
  out.decoherence =
      -0.5 * spec.k_s * detail::singlet_lindblad(qs_rho, rho_qs, qs_rho_qs);
  out.reaction = -(1.0 - p_coh) * spec.k_s * qs_rho_qs -
                 (p_coh * spec.k_s * singlet / tr) * rho;
  out.relaxation = relaxation_rhs(system, rho, spec.k_sr);
  return detail::finish(std::move(out));
}

/// Traditional anticommutator form -(k_S/2){Q_S, rho}.
inline RhsBreakdown haberkorn_rhs(const SpinSystem &system, const Matrix &h,
                                  const Matrix &rho, const ModelSpec &spec) {
  detail::require_kind(spec, ModelKind::haberkorn);
  detail::require_dim(system, h, "Hamiltonian");
  detail::require_dim(system, rho, "density matrix");
  detail::require_hermitian(h);
  const Matrix &qs = system.singlet;
  const auto d = static_cast<Eigen::Index>(system.dim);

  RhsBreakdown out;
  out.unitary = detail::unitary_term(h, rho);
  out.decoherence = Matrix::Zero(d, d);
  out.reaction = -0.5 * spec.k_s * (qs * rho + rho * qs);
  out.relaxation = relaxation_rhs(system, rho, spec.k_sr);
  return detail::finish(std::move(out));
}

inline RhsBreakdown evaluate_rhs(const SpinSystem &system, const Matrix &h,
                                 const Matrix &rho, const ModelSpec &spec) {
  switch (spec.kind) {
  case ModelKind::jones_hore:
    return jones_hore_rhs(system, h, rho, spec);
  case ModelKind::kominis:
    return kominis_rhs(system, h, rho, spec);
  case ModelKind::haberkorn:
    return haberkorn_rhs(system, h, rho, spec);
  }
  throw ValidationError("unknown model kind");
}

/// Compares the S-T block of the full generator against the closed-form
/// coherence decay rate of each model:
///   Jones-Hore  k_S
///   Kominis     k_S (1/2 + p_coh Tr{Q_S rho} / Tr rho)
///   Haberkorn   k_S / 2
/// The relaxation term contributes an extra -2 k_sr rho_tilde on top.
inline CoherentDecay coherent_decay_check(const SpinSystem &system,
                                          const Matrix &h, const Matrix &rho,
                                          const ModelSpec &spec) {
  const CoherenceParts parts = decompose(system, rho);
  const double scale = std::max(std::abs(real_trace(rho)), detail::max_abs(rho));
  if (detail::max_abs(parts.rho_tilde) <= 1e-14 * scale)
    throw ValidationError("rho_tilde vanishes; coherence decay rate undefined");

  const RhsBreakdown rhs = evaluate_rhs(system, h, rho, spec);
  const Matrix &qs = system.singlet;
  const Matrix &qt = system.triplet;
  auto off_diagonal = [&](const Matrix &m) -> Matrix {
    return qs * m * qt + qt * m * qs;
  };

  CoherentDecay out;
  out.measured = off_diagonal(rhs.total) - off_diagonal(rhs.unitary);
  out.rho_tilde = parts.rho_tilde;
  switch (spec.kind) {
  case ModelKind::jones_hore:
    out.predicted_rate = spec.k_s;
    break;
  case ModelKind::kominis: {
    const double p_coh =
        coherence_measure(system, rho, spec.coherence, spec.trace_floor);
    out.predicted_rate =
        spec.k_s * (0.5 + p_coh * singlet_population(system, rho) /
                              real_trace(rho));
    break;
  }
  case ModelKind::haberkorn:
    out.predicted_rate = 0.5 * spec.k_s;
    break;
  }
  return out;
}

} // namespace radpair
