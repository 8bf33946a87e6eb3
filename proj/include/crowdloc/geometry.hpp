#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "crowdloc/errors.hpp"
#include "crowdloc/estimator.hpp"
#include "crowdloc/rng.hpp"

namespace crowdloc {

struct Point2 {
  double x = 0.0;  // meters
  double y = 0.0;  // meters
};

inline bool finite(const Point2& p) { return std::isfinite(p.x) && std::isfinite(p.y); }

inline double distance(const Point2& a, const Point2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

using Polygon = std::vector<Point2>;

/// Even-odd crossing test. Points exactly on an edge count as inside.
inline bool point_in_polygon(const Point2& p, const Polygon& poly) {
  const std::size_t n = poly.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point2& a = poly[j];
    const Point2& b = poly[i];
    // on-edge check
    const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
    if (cross == 0.0 && std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
        std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y)) {
      return true;
    }
    if ((b.y > p.y) != (a.y > p.y)) {
      const double t = (p.y - b.y) / (a.y - b.y);
      if (p.x < b.x + t * (a.x - b.x)) inside = !inside;
    }
  }
  return inside;
}

inline double polygon_area(const Polygon& poly) {
  double s = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    s += poly[j].x * poly[i].y - poly[i].x * poly[j].y;
  }
  return 0.5 * s;
}

struct BoundingBox {
  double min_x = 0, min_y = 0, max_x = 0, max_y = 0;
  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
};

inline BoundingBox bounding_box(const Polygon& poly) {
  BoundingBox bb;
  bb.min_x = bb.max_x = poly.front().x;
  bb.min_y = bb.max_y = poly.front().y;
  for (const Point2& p : poly) {
    bb.min_x = std::min(bb.min_x, p.x);
    bb.max_x = std::max(bb.max_x, p.x);
    bb.min_y = std::min(bb.min_y, p.y);
    bb.max_y = std::max(bb.max_y, p.y);
  }
  return bb;
}

/// Walkable area: a simple CCW boundary polygon minus hole polygons
/// (walls, obstacles). Holes are excluded from sampling but distances
/// stay straight-line.
struct Region {
  Polygon boundary;
  std::vector<Polygon> holes;

  void validate() const {
    if (boundary.size() < 3) throw invalid_region_error("region boundary needs >= 3 vertices");
    for (const Point2& p : boundary) {
      if (!finite(p)) throw invalid_region_error("region vertex not finite");
    }
    if (std::abs(polygon_area(boundary)) <= 0.0) {
      throw invalid_region_error("region has zero area");
    }
  }

  bool contains(const Point2& p) const {
    if (!point_in_polygon(p, boundary)) return false;
    for (const Polygon& h : holes) {
      if (point_in_polygon(p, h)) return false;
    }
    return true;
  }

  BoundingBox bbox() const { return bounding_box(boundary); }

  double diameter() const {
    const BoundingBox bb = bbox();
    return std::hypot(bb.width(), bb.height());
  }

  /// Closest point of the region to p; identity when p is already inside.
  /// Used to clamp position estimates back into the AOI.
  Point2 clamp(const Point2& p) const {
    if (contains(p)) return p;
    Point2 best = boundary.front();
    double best_d = std::numeric_limits<double>::infinity();
    auto scan = [&](const Polygon& poly) {
      const std::size_t n = poly.size();
      for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point2& a = poly[j];
        const Point2& b = poly[i];
        const double dx = b.x - a.x, dy = b.y - a.y;
        const double len2 = dx * dx + dy * dy;
        double t = len2 > 0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        const Point2 c{a.x + t * dx, a.y + t * dy};
        const double d = distance(p, c);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
    };
    scan(boundary);
    for (const Polygon& h : holes) scan(h);
    return best;
  }
};

struct ApLayout {
  std::vector<Point2> positions;
  std::vector<std::string> ids;

  std::size_t size() const { return positions.size(); }

  void validate() const {
    if (positions.empty()) throw invalid_layout_error("layout has no APs");
    if (!ids.empty() && ids.size() != positions.size()) {
      throw invalid_layout_error("layout ids/positions length mismatch");
    }
    for (std::size_t i = 0; i < positions.size(); ++i) {
      if (!finite(positions[i])) throw invalid_layout_error("AP position not finite");
      for (std::size_t j = i + 1; j < positions.size(); ++j) {
        if (distance(positions[i], positions[j]) == 0.0) {
          throw invalid_layout_error("duplicate AP positions");
        }
      }
    }
  }

  /// Index of the nearest AP; ties go to the lowest index.
  std::size_t nearest(const Point2& p) const {
    std::size_t best = 0;
    double best_d = distance(p, positions[0]);
    for (std::size_t j = 1; j < positions.size(); ++j) {
      const double d = distance(p, positions[j]);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    return best;
  }

  /// Indices of the k nearest APs, sorted ascending (order-insensitive key).
  std::vector<std::size_t> nearest_k(const Point2& p, std::size_t k) const {
    std::vector<std::size_t> idx(positions.size());
    for (std::size_t j = 0; j < idx.size(); ++j) idx[j] = j;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return distance(p, positions[a]) < distance(p, positions[b]);
    });
    idx.resize(std::min(k, idx.size()));
    std::sort(idx.begin(), idx.end());
    return idx;
  }
};

enum class PartitionMethod { VC, KVC, KMEANS, EXTERNAL };

/// Partition of the region into cluster sub-regions. Sub-regions are kept
/// as a membership rule (dense rejection), not explicit polygons: the
/// distance CDFs only ever need samples.
struct Partition {
  PartitionMethod method = PartitionMethod::VC;
  std::vector<int> cluster_ids;
  std::function<int(const Point2&)> classify;  // -1 when unclassifiable

  int cell_of(const Point2& p) const { return classify(p); }
};

/// Nearest-AP partition of the region (order-1 Voronoi cells), clipped to
/// the region by construction of the membership rule.
inline Partition voronoi_partition(const ApLayout& layout, const Region& region) {
  layout.validate();
  region.validate();
  Partition part;
  part.method = PartitionMethod::VC;
  for (std::size_t j = 0; j < layout.size(); ++j) part.cluster_ids.push_back(static_cast<int>(j));
  part.classify = [layout, region](const Point2& p) -> int {
    if (!region.contains(p)) return -1;
    return static_cast<int>(layout.nearest(p));
  };
  return part;
}

/// Sampling density of measurement locations over the region.
struct LocationPrior {
  enum class Kind { Uniform, Grid };
  Kind kind = Kind::Uniform;
  double cell = 0.0;                         // grid cell size, meters
  std::vector<std::vector<double>> weights;  // row-major, row 0 at min_y

  void validate(const Region& region) const {
    if (kind == Kind::Uniform) return;
    if (cell <= 0.0) throw invalid_prior_error("grid prior needs cell > 0");
    double total = 0.0;
    for (const auto& row : weights) {
      for (double w : row) {
        if (w < 0.0 || !std::isfinite(w)) throw invalid_prior_error("negative grid weight");
        total += w;
      }
    }
    if (total <= 0.0) throw invalid_prior_error("prior has zero total mass");
    (void)region;
  }
};

/// Rejection sampler over (prior, region). Grid cell weights are flattened
/// once at construction.
class PriorSampler {
 public:
  PriorSampler(const LocationPrior& prior, const Region& region)
      : prior_(&prior), region_(&region), bb_(region.bbox()) {
    if (prior.kind == LocationPrior::Kind::Grid) {
      std::vector<double> flat;
      for (const auto& row : prior.weights) {
        for (double w : row) flat.push_back(w);
      }
      cols_ = prior.weights.empty() ? 0 : prior.weights[0].size();
      pick_ = std::discrete_distribution<std::size_t>(flat.begin(), flat.end());
    }
  }

  /// One draw restricted by `accept`; throws empty_cluster_error when the
  /// acceptance region looks empty.
  template <typename Accept>
  Point2 draw(std::mt19937_64& rng, Accept&& accept) {
    constexpr int kMaxAttempts = 200000;
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
      Point2 p;
      if (prior_->kind == LocationPrior::Kind::Uniform) {
        p = {bb_.min_x + u01(rng) * bb_.width(), bb_.min_y + u01(rng) * bb_.height()};
      } else {
        const std::size_t cell_idx = pick_(rng);
        const std::size_t row = cols_ ? cell_idx / cols_ : 0;
        const std::size_t col = cols_ ? cell_idx % cols_ : 0;
        const double x0 = bb_.min_x + static_cast<double>(col) * prior_->cell;
        const double y0 = bb_.min_y + static_cast<double>(row) * prior_->cell;
        p = {x0 + u01(rng) * prior_->cell, y0 + u01(rng) * prior_->cell};
      }
      if (region_->contains(p) && accept(p)) return p;
    }
    throw empty_cluster_error("prior has no mass on the requested sub-region");
  }

 private:
  const LocationPrior* prior_;
  const Region* region_;
  BoundingBox bb_;
  std::size_t cols_ = 0;
  std::discrete_distribution<std::size_t> pick_;
};

/// Seeded draw of `count` locations from the prior, restricted to the region.
inline std::vector<Point2> sample_prior(const LocationPrior& prior, const Region& region,
                                        std::size_t count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("sample_prior: count must be >= 1");
  region.validate();
  prior.validate(region);
  std::mt19937_64 rng = make_rng(seed);
  PriorSampler sampler(prior, region);
  std::vector<Point2> out;
  out.reserve(count);
  auto all = [](const Point2&) { return true; };
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(sampler.draw(rng, all));
  }
  return out;
}

/// Empirical CDF of the distance to `ap` for locations drawn from the prior
/// restricted to the sub-region given by `accept`.
template <typename Accept>
DistanceCdf distance_cdf(const Region& region, const LocationPrior& prior, Accept&& accept,
                         const Point2& ap, std::size_t n_samples, std::uint64_t seed) {
  if (n_samples < 100) throw std::invalid_argument("distance_cdf: n_samples must be >= 100");
  region.validate();
  prior.validate(region);
  std::mt19937_64 rng = make_rng(seed);
  PriorSampler sampler(prior, region);
  std::vector<double> dists;
  dists.reserve(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Point2 p = sampler.draw(rng, accept);
    dists.push_back(distance(p, ap));
  }
  return DistanceCdf(std::move(dists));
}

/// Whole-region overload.
inline DistanceCdf distance_cdf(const Region& region, const LocationPrior& prior,
                                const Point2& ap, std::size_t n_samples, std::uint64_t seed) {
  return distance_cdf(
      region, prior, [](const Point2&) { return true; }, ap, n_samples, seed);
}

}  // namespace crowdloc
