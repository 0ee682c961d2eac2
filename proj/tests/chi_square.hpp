#pragma once

#include <cstddef>
#include <functional>
#include <map>

#include <boost/math/special_functions/gamma.hpp>

namespace radpair::test {

/// Pearson chi-square p-value of integer draws against a pmf over [lo, hi].
/// Cells with expected count below 5 are pooled into a lower and an upper
/// tail; the upper tail also absorbs all probability above hi.
inline double chi_square_p(const std::map<long long, std::size_t> &hist,
                           std::size_t draws,
                           const std::function<double(long long)> &pmf,
                           long long lo, long long hi) {
  const double n = static_cast<double>(draws);
  auto observed = [&](long long k) {
    auto it = hist.find(k);
    return it == hist.end() ? 0.0 : static_cast<double>(it->second);
  };
  const long long mid = lo + (hi - lo) / 2;
  double chi2 = 0.0, inner_e = 0.0, inner_o = 0.0, low_e = 0.0, low_o = 0.0;
  std::size_t cells = 0;
  for (long long k = lo; k <= hi; ++k) {
    const double e = n * pmf(k);
    const double o = observed(k);
    if (e < 5.0 && k < mid) {
      low_e += e;
      low_o += o;
    } else if (e >= 5.0) {
      chi2 += (o - e) * (o - e) / e;
      inner_e += e;
      inner_o += o;
      ++cells;
    }
  }
  for (const auto &[k, c] : hist)
    if (k < lo)
      low_o += static_cast<double>(c);
  const double high_e = n - inner_e - low_e;
  const double high_o = n - inner_o - low_o;
  for (auto [o, e] : {std::pair{low_o, low_e}, std::pair{high_o, high_e}})
    if (e >= 1.0) {
      chi2 += (o - e) * (o - e) / e;
      ++cells;
    }
  return boost::math::gamma_q(0.5 * static_cast<double>(cells - 1), 0.5 * chi2);
}

} // namespace radpair::test
