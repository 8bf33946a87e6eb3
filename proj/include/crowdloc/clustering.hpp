#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <vector>

#include "crowdloc/channel.hpp"
#include "crowdloc/errors.hpp"
#include "crowdloc/geometry.hpp"
#include "crowdloc/rng.hpp"

namespace crowdloc {

struct ClusterAssignment {
  std::vector<int> labels;  // -1 = unassignable (no AP heard)
  PartitionMethod method = PartitionMethod::VC;
  std::vector<std::size_t> unassigned;  // indices with label -1
};

/// Strongest-AP clustering: label is the index of the max RSS entry, ties
/// to the lowest AP index. Cluster ids coincide with Voronoi cell indices.
inline ClusterAssignment assign_max_rss(const RssDataset& dataset) {
  dataset.validate();
  ClusterAssignment out;
  out.method = PartitionMethod::VC;
  out.labels.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const RssVector& v = dataset.vectors[i];
    if (v.all_missing()) {
      out.labels.push_back(-1);
      out.unassigned.push_back(i);
      continue;
    }
    const auto it = std::max_element(v.values.begin(), v.values.end());
    out.labels.push_back(static_cast<int>(it - v.values.begin()));
  }
  return out;
}

/// Order-insensitive key: indices of the k largest RSS entries, ascending.
inline std::vector<int> top_k_key(const RssVector& v, std::size_t k) {
  std::vector<std::size_t> idx(v.values.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return v.values[a] > v.values[b];
  });
  idx.resize(std::min(k, idx.size()));
  std::vector<int> key(idx.begin(), idx.end());
  std::sort(key.begin(), key.end());
  return key;
}

struct KvcAssignment {
  ClusterAssignment assignment;
  std::vector<std::vector<int>> keys;  // cluster id -> AP index set
};

/// Order-k Voronoi clustering: vectors sharing the same set of k strongest
/// APs form one cluster. k = 1 reduces to assign_max_rss (with re-numbered
/// ids via the key table).
inline KvcAssignment assign_kvc(const RssDataset& dataset, std::size_t k) {
  dataset.validate();
  if (k < 1 || k > dataset.n_aps()) throw std::invalid_argument("assign_kvc: bad k");
  KvcAssignment out;
  out.assignment.method = PartitionMethod::KVC;
  std::map<std::vector<int>, int> key_to_id;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const RssVector& v = dataset.vectors[i];
    if (v.all_missing()) {
      out.assignment.labels.push_back(-1);
      out.assignment.unassigned.push_back(i);
      continue;
    }
    const std::vector<int> key = top_k_key(v, k);
    auto [it, inserted] = key_to_id.try_emplace(key, static_cast<int>(out.keys.size()));
    if (inserted) out.keys.push_back(key);
    out.assignment.labels.push_back(it->second);
  }
  return out;
}

struct KMeansResult {
  ClusterAssignment assignment;
  std::vector<std::vector<double>> centroids;  // k centroids in dBm space
  std::size_t iterations = 0;
  double objective = 0.0;  // final sum of squared distances
};

namespace detail {

inline double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace detail

/// Lloyd's algorithm on RSS vectors with k-means++ seeding. An emptied
/// cluster is re-seeded from the point farthest from its centroid.
inline KMeansResult assign_kmeans(const RssDataset& dataset, std::size_t k,
                                  std::size_t max_iter, std::uint64_t seed) {
  dataset.validate();
  const std::size_t m = dataset.size();
  if (k < 1 || k > m) throw std::invalid_argument("assign_kmeans: bad k");
  std::mt19937_64 rng = make_rng(seed);

  // k-means++ seeding
  KMeansResult out;
  out.assignment.method = PartitionMethod::KMEANS;
  std::uniform_int_distribution<std::size_t> pick_first(0, m - 1);
  out.centroids.push_back(dataset.vectors[pick_first(rng)].values);
  std::vector<double> d2(m, std::numeric_limits<double>::infinity());
  while (out.centroids.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      d2[i] = std::min(d2[i], detail::sq_dist(dataset.vectors[i].values, out.centroids.back()));
      total += d2[i];
    }
    std::uniform_real_distribution<double> u(0.0, total);
    double t = u(rng);
    std::size_t chosen = m - 1;
    for (std::size_t i = 0; i < m; ++i) {
      t -= d2[i];
      if (t <= 0.0) {
        chosen = i;
        break;
      }
    }
    out.centroids.push_back(dataset.vectors[chosen].values);
  }

  std::vector<int> labels(m, 0);
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < m; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = detail::sq_dist(dataset.vectors[i].values, out.centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(c);
        }
      }
      if (labels[i] != best) {
        labels[i] = best;
        changed = true;
      }
    }
    out.iterations = iter + 1;
    // update step
    const std::size_t n = dataset.n_aps();
    std::vector<std::vector<double>> sums(k, std::vector<double>(n, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t c = static_cast<std::size_t>(labels[i]);
      ++counts[c];
      for (std::size_t j = 0; j < n; ++j) sums[c][j] += dataset.vectors[i].values[j];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // re-seed from the point farthest from its current centroid
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < m; ++i) {
          const double d = detail::sq_dist(
              dataset.vectors[i].values, out.centroids[static_cast<std::size_t>(labels[i])]);
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        out.centroids[c] = dataset.vectors[far].values;
        changed = true;
        continue;
      }
      for (std::size_t j = 0; j < n; ++j) out.centroids[c][j] = sums[c][j] / counts[c];
    }
    if (!changed) break;
  }

  out.assignment.labels = labels;
  out.objective = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    out.objective += detail::sq_dist(dataset.vectors[i].values,
                                     out.centroids[static_cast<std::size_t>(labels[i])]);
  }
  return out;
}

/// Wraps externally supplied labels (side information such as room ids).
inline ClusterAssignment assign_external(const RssDataset& dataset,
                                         const std::vector<int>& labels) {
  dataset.validate();
  if (labels.size() != dataset.size()) {
    throw std::invalid_argument("assign_external: label count does not match dataset");
  }
  ClusterAssignment out;
  out.method = PartitionMethod::EXTERNAL;
  out.labels = labels;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) out.unassigned.push_back(i);
  }
  return out;
}

/// Nearest centroid in RSS space; used to place test vectors into K-means
/// clusters.
inline int nearest_centroid(const std::vector<double>& rss,
                            const std::vector<std::vector<double>>& centroids) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = detail::sq_dist(rss, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

}  // namespace crowdloc
