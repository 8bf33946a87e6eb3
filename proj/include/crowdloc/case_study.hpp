#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "crowdloc/channel.hpp"
#include "crowdloc/estimator.hpp"

namespace crowdloc {

struct CaseStudyRow {
  double true_distance = 0.0;  // meters
  double rss = 0.0;            // dBm
  double est_ordering = 0.0;   // meters
  double est_cdf = std::numeric_limits<double>::quiet_NaN();  // case 3 only
};

struct CaseStudyResult {
  std::vector<CaseStudyRow> rows;
  Dataset1d data;
};

/// 1D reconstruction study: generates a single-AP dataset for the given
/// placement case and estimates each measurement's distance by the ordering
/// method, plus the CDF method for the beta-distributed case.
inline CaseStudyResult run_case_study(int case_id, const ChannelParams& params, std::size_t m,
                                      double d0, double d_max, double beta_alpha,
                                      double beta_beta, std::uint64_t seed,
                                      std::size_t dist_cdf_samples = 10000) {
  Placement1d placement;
  switch (case_id) {
    case 1: placement = Placement1d::UniformSpaced; break;
    case 2: placement = Placement1d::UniformRandom; break;
    case 3: placement = Placement1d::Beta; break;
    default: throw std::invalid_argument("case must be 1, 2, or 3");
  }
  CaseStudyResult out;
  out.data = generate_1d_dataset(params, placement, m, d0, d_max, beta_alpha, beta_beta, seed);

  std::vector<double> rss(m);
  for (std::size_t i = 0; i < m; ++i) rss[i] = out.data.dataset.vectors[i].values[0];
  const std::vector<double> est_order = order_estimate(rss, d0, d_max);

  std::vector<double> est_cdf;
  if (case_id == 3) {
    // known distance distribution: scaled Beta(alpha, beta), sampled
    std::mt19937_64 rng = make_rng(derive_seed(seed, 7));
    std::gamma_distribution<double> ga(beta_alpha, 1.0);
    std::gamma_distribution<double> gb(beta_beta, 1.0);
    std::vector<double> dist_samples(dist_cdf_samples);
    for (double& d : dist_samples) {
      const double x = ga(rng);
      const double y = gb(rng);
      d = d0 + (d_max - d0) * x / (x + y);
    }
    const DistanceCdf f_d(std::move(dist_samples));
    est_cdf = reconstruct_case3(rss, f_d);
  }

  out.rows.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    out.rows[i].true_distance = out.data.distances[i];
    out.rows[i].rss = rss[i];
    out.rows[i].est_ordering = est_order[i];
    if (case_id == 3) out.rows[i].est_cdf = est_cdf[i];
  }
  return out;
}

}  // namespace crowdloc
