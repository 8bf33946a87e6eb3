#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "crowdloc/errors.hpp"

namespace crowdloc {

/// Piecewise-linear empirical CDF built on Weibull plotting positions
/// p_i = i/(m+1). Evaluation clamps to [1/(m+1), m/(m+1)], the inverse
/// clamps to the sample support, so F and F^-1 are total functions.
class EmpiricalCdf {
 public:
  explicit EmpiricalCdf(std::vector<double> samples) : values_(std::move(samples)) {
    if (values_.size() < 2) {
      throw insufficient_data_error("EmpiricalCdf needs at least 2 samples");
    }
    std::sort(values_.begin(), values_.end());
  }

  std::size_t size() const { return values_.size(); }
  const std::vector<double>& sorted_values() const { return values_; }
  double min() const { return values_.front(); }
  double max() const { return values_.back(); }

  /// Plotting position of the 1-based rank i.
  double position(std::size_t i) const {
    return static_cast<double>(i) / static_cast<double>(values_.size() + 1);
  }

  double eval(double s) const {
    const std::size_t m = values_.size();
    if (s <= values_.front()) return position(1);
    if (s >= values_.back()) return position(m);
    // first index with value > s
    const auto it = std::upper_bound(values_.begin(), values_.end(), s);
    const std::size_t hi = static_cast<std::size_t>(it - values_.begin());  // 0-based
    const std::size_t lo = hi - 1;
    const double v_lo = values_[lo];
    const double v_hi = values_[hi];
    const double p_lo = position(lo + 1);
    const double p_hi = position(hi + 1);
    if (v_hi == v_lo) return p_hi;
    return p_lo + (p_hi - p_lo) * (s - v_lo) / (v_hi - v_lo);
  }

  double inverse(double p) const {
    const std::size_t m = values_.size();
    if (p <= position(1)) return values_.front();
    if (p >= position(m)) return values_.back();
    // continuous rank r in [1, m] with p = r/(m+1)
    const double r = p * static_cast<double>(m + 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(r));  // 1-based
    const double frac = r - static_cast<double>(lo);
    if (lo >= m) return values_.back();
    return values_[lo - 1] + frac * (values_[lo] - values_[lo - 1]);
  }

 private:
  std::vector<double> values_;
};

/// CDF of the distance to an AP, same representation as EmpiricalCdf.
using DistanceCdf = EmpiricalCdf;

struct OrderStatMoments {
  double mean = 0.0;      // meters
  double variance = 0.0;  // meters^2
};

inline EmpiricalCdf ecdf_build(std::vector<double> samples) {
  return EmpiricalCdf(std::move(samples));
}

/// Mean and variance of the r-th order statistic of n uniform draws on [a, b].
inline OrderStatMoments order_stat_moments(double a, double b, std::size_t n, std::size_t r) {
  if (r < 1 || r > n) {
    throw std::domain_error("order_stat_moments: rank out of range");
  }
  const double nd = static_cast<double>(n);
  const double rd = static_cast<double>(r);
  OrderStatMoments out;
  out.mean = a + (b - a) * rd / (nd + 1.0);
  out.variance = (b - a) * (b - a) * rd * (nd - rd + 1.0) /
                 ((nd + 1.0) * (nd + 1.0) * (nd + 2.0));
  return out;
}

/// Ranks RSS values in descending order and maps the r-th largest to the
/// r-th uniform quantile of [a, b]. Output is aligned with the input order;
/// ties keep their input order.
inline std::vector<double> order_estimate(const std::vector<double>& rss, double a, double b) {
  if (rss.empty()) return {};
  if (!(b > a)) throw std::invalid_argument("order_estimate: requires b > a");
  const std::size_t m = rss.size();
  std::vector<std::size_t> idx(m);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t i, std::size_t j) { return rss[i] > rss[j]; });
  std::vector<double> out(m);
  for (std::size_t rank = 1; rank <= m; ++rank) {
    out[idx[rank - 1]] =
        a + (b - a) * static_cast<double>(rank) / static_cast<double>(m + 1);
  }
  return out;
}

/// Quantile transform d = F_D^-1(1 - F_S(s)).
inline double cdf_convert(double s, const EmpiricalCdf& f_s, const DistanceCdf& f_d) {
  return f_d.inverse(1.0 - f_s.eval(s));
}

/// Builds the empirical RSS CDF from the given measurements and converts
/// each of them through the known distance CDF.
inline std::vector<double> reconstruct_case3(const std::vector<double>& rss,
                                             const DistanceCdf& f_d) {
  const EmpiricalCdf f_s = ecdf_build(rss);
  std::vector<double> out;
  out.reserve(rss.size());
  for (double s : rss) out.push_back(cdf_convert(s, f_s, f_d));
  return out;
}

}  // namespace crowdloc
