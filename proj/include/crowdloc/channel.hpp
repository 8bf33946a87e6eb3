#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "crowdloc/errors.hpp"
#include "crowdloc/geometry.hpp"
#include "crowdloc/rng.hpp"

namespace crowdloc {

/// RSS readings below this floor are clamped to it; it doubles as the
/// missing-reading sentinel.
inline constexpr double kRssFloor = -100.0;  // dBm

/// Log-distance path loss with correlated (Gudmundson) shadowing and
/// additive dB measurement noise.
struct ChannelParams {
  double pt = 0.0;           // transmit power, dBm
  double k = 0.0;            // path gain at d0, dB
  double gamma = 3.0;        // path loss exponent
  double d0 = 2.0;           // reference distance, m
  double sigma_chi = 10.0;   // shadowing std, dB
  double xc = 10.0;          // decorrelation distance, m
  double noise_sigma = 3.0;  // measurement noise std, dB

  void validate() const {
    if (gamma <= 0.0) throw std::invalid_argument("gamma must be > 0");
    if (d0 <= 0.0) throw std::invalid_argument("d0 must be > 0");
    if (sigma_chi < 0.0) throw std::invalid_argument("sigma_chi must be >= 0");
    if (xc <= 0.0) throw std::invalid_argument("xc must be > 0");
    if (noise_sigma < 0.0) throw std::invalid_argument("noise_sigma must be >= 0");
  }
};

struct RssVector {
  std::vector<double> values;  // dBm, one per AP; kRssFloor = missing

  bool all_missing() const {
    return std::all_of(values.begin(), values.end(),
                       [](double v) { return v <= kRssFloor; });
  }
};

struct RssDataset {
  std::vector<RssVector> vectors;
  std::vector<std::string> ap_ids;
  std::optional<std::vector<Point2>> truth;  // evaluation only

  std::size_t size() const { return vectors.size(); }
  std::size_t n_aps() const { return ap_ids.size(); }

  void validate() const {
    if (vectors.empty()) throw std::invalid_argument("dataset is empty");
    for (const RssVector& v : vectors) {
      if (v.values.size() != ap_ids.size()) {
        throw std::invalid_argument("RSS vector length does not match AP count");
      }
    }
    if (truth && truth->size() != vectors.size()) {
      throw std::invalid_argument("truth length does not match dataset size");
    }
  }
};

/// Mean received power at distance d (no shadowing). Distances below d0
/// are clamped to d0.
inline double mean_rss(const ChannelParams& params, double d) {
  if (d <= 0.0) throw std::domain_error("mean_rss: distance must be > 0");
  const double dd = std::max(d, params.d0);
  return params.pt + params.k - 10.0 * params.gamma * std::log10(dd / params.d0);
}

/// Correlated shadowing along a line: first-order AR recursion over sorted
/// positions, chi_{i+1} = a*chi_i + sqrt(1-a^2)*sigma*eps, a = exp(-dx/xc).
/// Marginal is N(0, sigma^2) at every position and the covariance at lag
/// delta is sigma^2 * exp(-delta/xc).
inline std::vector<double> shadowing_1d(double sigma_chi, double xc,
                                        const std::vector<double>& positions,
                                        std::uint64_t seed) {
  if (sigma_chi < 0.0 || xc <= 0.0) throw std::invalid_argument("bad shadowing params");
  if (!std::is_sorted(positions.begin(), positions.end())) {
    throw std::invalid_argument("shadowing_1d: positions must be sorted ascending");
  }
  std::vector<double> out(positions.size(), 0.0);
  if (positions.empty() || sigma_chi == 0.0) return out;
  std::mt19937_64 rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  out[0] = sigma_chi * normal(rng);
  for (std::size_t i = 1; i < positions.size(); ++i) {
    const double a = std::exp(-(positions[i] - positions[i - 1]) / xc);
    out[i] = a * out[i - 1] + std::sqrt(1.0 - a * a) * sigma_chi * normal(rng);
  }
  return out;
}

namespace detail {

/// In-place lower Cholesky with diagonal jitter retries.
/// `mat` is row-major n*n; on success it holds L in the lower triangle.
inline void cholesky_with_jitter(std::vector<double>& mat, std::size_t n) {
  constexpr int kMaxJitter = 6;
  double jitter = 1e-10;
  std::vector<double> saved = mat;
  for (int attempt = 0; attempt <= kMaxJitter; ++attempt) {
    bool ok = true;
    for (std::size_t j = 0; j < n && ok; ++j) {
      double diag = mat[j * n + j];
      for (std::size_t k = 0; k < j; ++k) diag -= mat[j * n + k] * mat[j * n + k];
      if (diag <= 0.0) {
        ok = false;
        break;
      }
      const double l_jj = std::sqrt(diag);
      mat[j * n + j] = l_jj;
      for (std::size_t i = j + 1; i < n; ++i) {
        double s = mat[i * n + j];
        for (std::size_t k = 0; k < j; ++k) s -= mat[i * n + k] * mat[j * n + k];
        mat[i * n + j] = s / l_jj;
      }
    }
    if (ok) return;
    mat = saved;
    for (std::size_t j = 0; j < n; ++j) mat[j * n + j] += jitter;
    saved = mat;
    jitter *= 10.0;
  }
  throw numerical_error("shadowing covariance factorization failed");
}

}  // namespace detail

/// 2D correlated shadowing field over the given points: zero-mean Gaussian
/// with Cov(i,j) = sigma^2 * exp(-||p_i - p_j|| / xc), realized via Cholesky.
/// Point sets above `batch_cap` are factorized in independent batches.
inline std::vector<double> shadowing_2d(double sigma_chi, double xc,
                                        const std::vector<Point2>& points, std::uint64_t seed,
                                        std::size_t batch_cap = 4096) {
  if (sigma_chi < 0.0 || xc <= 0.0) throw std::invalid_argument("bad shadowing params");
  if (batch_cap < 1) throw std::invalid_argument("batch_cap must be >= 1");
  std::vector<double> out(points.size(), 0.0);
  if (points.empty() || sigma_chi == 0.0) return out;
  std::mt19937_64 rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double var = sigma_chi * sigma_chi;
  for (std::size_t start = 0; start < points.size(); start += batch_cap) {
    const std::size_t n = std::min(batch_cap, points.size() - start);
    std::vector<double> cov(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        const double c = var * std::exp(-distance(points[start + i], points[start + j]) / xc);
        cov[i * n + j] = c;
        cov[j * n + i] = c;
      }
    }
    detail::cholesky_with_jitter(cov, n);
    std::vector<double> z(n);
    for (double& v : z) v = normal(rng);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j <= i; ++j) s += cov[i * n + j] * z[j];
      out[start + i] = s;
    }
  }
  return out;
}

enum class Placement1d { UniformSpaced, UniformRandom, Beta };

struct Dataset1d {
  RssDataset dataset;             // single AP at the origin
  std::vector<double> distances;  // true distances, aligned with the vectors
};

/// Synthetic 1D measurements along the positive x-axis, AP at the origin.
/// Case 1: evenly spaced at d0 + (d_max-d0)*i/(m+1); Case 2: i.i.d. uniform
/// on [d0, d_max]; Case 3: i.i.d. Beta(alpha, beta) scaled to [d0, d_max].
inline Dataset1d generate_1d_dataset(const ChannelParams& params, Placement1d placement,
                                     std::size_t m, double d0, double d_max,
                                     double beta_alpha, double beta_beta, std::uint64_t seed) {
  params.validate();
  if (m < 2) throw std::invalid_argument("generate_1d_dataset: m must be >= 2");
  if (!(d_max > d0)) throw std::invalid_argument("generate_1d_dataset: d_max must exceed d0");
  std::mt19937_64 rng = make_rng(derive_seed(seed, 0));
  std::vector<double> dists(m);
  switch (placement) {
    case Placement1d::UniformSpaced:
      for (std::size_t i = 1; i <= m; ++i) {
        dists[i - 1] = d0 + (d_max - d0) * static_cast<double>(i) / static_cast<double>(m + 1);
      }
      break;
    case Placement1d::UniformRandom: {
      std::uniform_real_distribution<double> u(d0, d_max);
      for (double& d : dists) d = u(rng);
      break;
    }
    case Placement1d::Beta: {
      if (beta_alpha <= 0.0 || beta_beta <= 0.0) {
        throw std::invalid_argument("beta parameters must be > 0");
      }
      std::gamma_distribution<double> ga(beta_alpha, 1.0);
      std::gamma_distribution<double> gb(beta_beta, 1.0);
      for (double& d : dists) {
        const double x = ga(rng);
        const double y = gb(rng);
        d = d0 + (d_max - d0) * x / (x + y);
      }
      break;
    }
  }

  // shadowing is generated along the sorted axis, then mapped back
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return dists[a] < dists[b]; });
  std::vector<double> sorted_pos(m);
  for (std::size_t i = 0; i < m; ++i) sorted_pos[i] = dists[order[i]];
  const std::vector<double> chi =
      shadowing_1d(params.sigma_chi, params.xc, sorted_pos, derive_seed(seed, 1));

  std::mt19937_64 noise_rng = make_rng(derive_seed(seed, 2));
  std::normal_distribution<double> normal(0.0, 1.0);
  Dataset1d out;
  out.distances = dists;
  out.dataset.ap_ids = {"ap0"};
  out.dataset.vectors.resize(m);
  out.dataset.truth = std::vector<Point2>(m);
  for (std::size_t i = 0; i < m; ++i) {
    (*out.dataset.truth)[order[i]] = Point2{sorted_pos[i], 0.0};
    const double rss =
        mean_rss(params, sorted_pos[i]) + chi[i] + params.noise_sigma * normal(noise_rng);
    out.dataset.vectors[order[i]].values = {std::max(rss, kRssFloor)};
  }
  return out;
}

struct Gen2dOptions {
  std::size_t shadowing_batch_cap = 4096;
  double floor_dbm = kRssFloor;
};

/// Synthetic crowdsourced 2D dataset: locations from the prior, per-AP RSS
/// = path loss + an independent correlated shadowing field per AP + i.i.d.
/// measurement noise. Ground truth is recorded for evaluation.
inline RssDataset generate_2d_dataset(const Region& region, const LocationPrior& prior,
                                      const ApLayout& layout, const ChannelParams& params,
                                      std::size_t m, std::uint64_t seed,
                                      const Gen2dOptions& opts = {}) {
  params.validate();
  layout.validate();
  if (m < 1) throw std::invalid_argument("generate_2d_dataset: m must be >= 1");
  const std::vector<Point2> points = sample_prior(prior, region, m, derive_seed(seed, 0));

  RssDataset ds;
  ds.truth = points;
  ds.vectors.resize(m);
  for (std::size_t i = 0; i < m; ++i) ds.vectors[i].values.resize(layout.size());
  ds.ap_ids.resize(layout.size());
  for (std::size_t j = 0; j < layout.size(); ++j) {
    ds.ap_ids[j] = layout.ids.empty() ? "ap" + std::to_string(j) : layout.ids[j];
  }

  std::mt19937_64 noise_rng = make_rng(derive_seed(seed, 1));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t j = 0; j < layout.size(); ++j) {
    const std::vector<double> chi =
        shadowing_2d(params.sigma_chi, params.xc, points, derive_seed(seed, 100 + j),
                     opts.shadowing_batch_cap);
    for (std::size_t i = 0; i < m; ++i) {
      double rss = mean_rss(params, std::max(distance(points[i], layout.positions[j]),
                                             1e-9)) +
                   chi[i] + params.noise_sigma * normal(noise_rng);
      ds.vectors[i].values[j] = std::max(rss, opts.floor_dbm);
    }
  }
  return ds;
}

}  // namespace crowdloc
