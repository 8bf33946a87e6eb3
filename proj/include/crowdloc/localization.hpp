#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "crowdloc/channel.hpp"
#include "crowdloc/errors.hpp"
#include "crowdloc/geometry.hpp"

namespace crowdloc {

enum class DistanceSource { CDF, LDPL };

/// Per-target estimated distances to every AP, row-aligned with the dataset.
struct DistanceEstimateSet {
  std::vector<std::vector<double>> distances;  // m x n, meters
  DistanceSource source = DistanceSource::CDF;
  std::vector<std::string> warnings;
};

struct PositionEstimate {
  Point2 point;
  double residual = 0.0;  // RMS of | ||p-q_j|| - d_j |
};

struct TrilaterationOptions {
  // reference AP whose equation is subtracted from the others; -1 = last
  int reference_ap = -1;
};

/// Linearized least-squares multilateration: subtracts the reference AP's
/// range equation from the others and solves the 2x2 normal equations.
inline PositionEstimate trilaterate(const ApLayout& layout, const std::vector<double>& dists,
                                    const TrilaterationOptions& opts = {}) {
  const std::size_t n = layout.size();
  if (n < 3) throw degenerate_geometry_error("trilateration needs >= 3 APs");
  if (dists.size() != n) throw std::invalid_argument("distance count != AP count");
  const std::size_t ref =
      opts.reference_ap < 0 ? n - 1 : static_cast<std::size_t>(opts.reference_ap);
  if (ref >= n) throw std::invalid_argument("reference AP out of range");

  const Point2 qr = layout.positions[ref];
  const double dr = dists[ref];
  // normal equations accumulated directly: M = A^T A, v = A^T b
  double m00 = 0, m01 = 0, m11 = 0, v0 = 0, v1 = 0;
  double scale = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == ref) continue;
    const Point2 q = layout.positions[j];
    const double a0 = 2.0 * (q.x - qr.x);
    const double a1 = 2.0 * (q.y - qr.y);
    const double b = q.x * q.x - qr.x * qr.x + q.y * q.y - qr.y * qr.y -
                     dists[j] * dists[j] + dr * dr;
    m00 += a0 * a0;
    m01 += a0 * a1;
    m11 += a1 * a1;
    v0 += a0 * b;
    v1 += a1 * b;
    scale = std::max(scale, a0 * a0 + a1 * a1);
  }
  const double det = m00 * m11 - m01 * m01;
  if (scale <= 0.0 || det <= 1e-10 * scale * scale) {
    throw degenerate_geometry_error("collinear AP layout: normal equations are singular");
  }
  PositionEstimate est;
  est.point = {(m11 * v0 - m01 * v1) / det, (m00 * v1 - m01 * v0) / det};
  double ss = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double r = distance(est.point, layout.positions[j]) - dists[j];
    ss += r * r;
  }
  est.residual = std::sqrt(ss / static_cast<double>(n));
  return est;
}

/// Linear RSS-to-distance baseline: per AP, the training maximum maps to
/// 0 m and the training minimum to l_ref, linear in between and clamped.
struct LdplModel {
  std::vector<double> s_min;
  std::vector<double> s_max;
  double l_ref = 0.0;

  static LdplModel fit(const RssDataset& train, double l_ref) {
    train.validate();
    if (l_ref <= 0.0) throw std::invalid_argument("LdplModel: l_ref must be > 0");
    LdplModel model;
    model.l_ref = l_ref;
    const std::size_t n = train.n_aps();
    model.s_min.assign(n, std::numeric_limits<double>::infinity());
    model.s_max.assign(n, -std::numeric_limits<double>::infinity());
    for (const RssVector& v : train.vectors) {
      for (std::size_t j = 0; j < n; ++j) {
        model.s_min[j] = std::min(model.s_min[j], v.values[j]);
        model.s_max[j] = std::max(model.s_max[j], v.values[j]);
      }
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (!(model.s_max[j] > model.s_min[j])) {
        throw undefined_scale_error("constant RSS column for AP " + std::to_string(j));
      }
    }
    return model;
  }

  double convert(double s, std::size_t ap) const {
    const double d = l_ref * (s_max[ap] - s) / (s_max[ap] - s_min[ap]);
    return std::clamp(d, 0.0, l_ref);
  }

  std::vector<double> convert_vector(const RssVector& v) const {
    std::vector<double> out(v.values.size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = convert(v.values[j], j);
    return out;
  }
};

/// Fits the linear scale on the dataset itself and converts every entry.
inline DistanceEstimateSet ldpl_convert(const RssDataset& dataset, double l_ref) {
  const LdplModel model = LdplModel::fit(dataset, l_ref);
  DistanceEstimateSet out;
  out.source = DistanceSource::LDPL;
  out.distances.reserve(dataset.size());
  for (const RssVector& v : dataset.vectors) out.distances.push_back(model.convert_vector(v));
  return out;
}

/// Labeled-fingerprint baseline: mean (optionally inverse-distance-weighted)
/// of the truth positions of the k nearest training vectors in dBm space.
inline PositionEstimate knn_locate(const RssDataset& train, const RssVector& query,
                                   std::size_t k, bool weighted = false) {
  train.validate();
  if (!train.truth) throw std::invalid_argument("knn_locate: training set has no truth");
  if (k < 1 || k > train.size()) throw std::invalid_argument("knn_locate: bad k");
  std::vector<std::size_t> idx(train.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::vector<double> d(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < query.values.size(); ++j) {
      const double diff = train.vectors[i].values[j] - query.values[j];
      s += diff * diff;
    }
    d[i] = std::sqrt(s);
  }
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
  double wx = 0.0, wy = 0.0, wsum = 0.0;
  for (std::size_t r = 0; r < k; ++r) {
    const std::size_t i = idx[r];
    const double w = weighted ? 1.0 / (d[i] + 1e-9) : 1.0;
    wx += w * (*train.truth)[i].x;
    wy += w * (*train.truth)[i].y;
    wsum += w;
  }
  PositionEstimate est;
  est.point = {wx / wsum, wy / wsum};
  est.residual = d[idx[0]];
  return est;
}

struct ErrorReport {
  std::vector<double> errors;  // meters, sorted ascending
  double mean = 0.0;
  double median = 0.0;
  double p67 = 0.0;
  double p90 = 0.0;
  double p95 = 0.0;

  /// Linear-interpolation quantile of the sorted errors, q in [0, 1].
  double quantile(double q) const {
    if (errors.empty()) return 0.0;
    const double pos = q * static_cast<double>(errors.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, errors.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return errors[lo] + frac * (errors[hi] - errors[lo]);
  }
};

inline ErrorReport evaluate(const std::vector<PositionEstimate>& estimates,
                            const std::vector<Point2>& truth) {
  if (estimates.size() != truth.size()) {
    throw std::invalid_argument("evaluate: estimate/truth length mismatch");
  }
  ErrorReport rep;
  rep.errors.reserve(estimates.size());
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    rep.errors.push_back(distance(estimates[i].point, truth[i]));
  }
  std::sort(rep.errors.begin(), rep.errors.end());
  rep.mean = rep.errors.empty()
                 ? 0.0
                 : std::accumulate(rep.errors.begin(), rep.errors.end(), 0.0) /
                       static_cast<double>(rep.errors.size());
  rep.median = rep.quantile(0.50);
  rep.p67 = rep.quantile(0.67);
  rep.p90 = rep.quantile(0.90);
  rep.p95 = rep.quantile(0.95);
  return rep;
}

}  // namespace crowdloc
