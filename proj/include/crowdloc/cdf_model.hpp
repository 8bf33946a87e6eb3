#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "crowdloc/channel.hpp"
#include "crowdloc/clustering.hpp"
#include "crowdloc/errors.hpp"
#include "crowdloc/estimator.hpp"
#include "crowdloc/geometry.hpp"
#include "crowdloc/localization.hpp"

namespace crowdloc {

struct CdfModelOptions {
  std::size_t min_cluster_size = 20;    // smaller clusters get merged
  std::size_t dist_cdf_samples = 10000; // prior samples per (cluster, AP)
};

/// Per-cluster RSS and distance CDFs (the trained side of the RSS
/// conversion): for cluster c and AP j, a distance estimate is
/// F_{D_c,j}^-1(1 - F_{S_c,j}(s_j)).
class CdfModel {
 public:
  struct Cluster {
    std::vector<int> base_labels;        // assignment labels merged into this cluster
    std::vector<EmpiricalCdf> rss_cdfs;  // per AP
    std::vector<DistanceCdf> dist_cdfs;  // per AP
    std::vector<double> mean_rss;        // centroid in dBm space, for fallback routing
  };

  std::vector<Cluster> clusters;
  std::vector<std::string> warnings;

  std::size_t cluster_of_label(int label) const {
    const auto it = label_to_cluster_.find(label);
    if (it != label_to_cluster_.end()) return it->second;
    throw empty_cluster_error("no trained cluster for label " + std::to_string(label));
  }

  /// Routes by label when known, otherwise by nearest cluster mean RSS.
  std::size_t route(int label, const RssVector& v) const {
    const auto it = label_to_cluster_.find(label);
    if (it != label_to_cluster_.end()) return it->second;
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      const double d = detail::sq_dist(v.values, clusters[c].mean_rss);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    return best;
  }

  std::vector<double> convert(std::size_t cluster, const RssVector& v) const {
    const Cluster& c = clusters[cluster];
    std::vector<double> out(v.values.size());
    for (std::size_t j = 0; j < v.values.size(); ++j) {
      out[j] = cdf_convert(v.values[j], c.rss_cdfs[j], c.dist_cdfs[j]);
    }
    return out;
  }

  void set_label_map(std::map<int, std::size_t> map) { label_to_cluster_ = std::move(map); }

 private:
  std::map<int, std::size_t> label_to_cluster_;
};

/// Maps points to assignment labels; ties the RSS-space clusters back to
/// geometry so per-cluster distance CDFs can be sampled.
using SpatialClassifier = std::function<int(const Point2&)>;

inline SpatialClassifier vc_classifier(const ApLayout& layout) {
  return [layout](const Point2& p) { return static_cast<int>(layout.nearest(p)); };
}

inline SpatialClassifier kvc_classifier(const ApLayout& layout, std::size_t k,
                                        const std::vector<std::vector<int>>& keys) {
  std::map<std::vector<int>, int> key_to_id;
  for (std::size_t i = 0; i < keys.size(); ++i) key_to_id[keys[i]] = static_cast<int>(i);
  return [layout, k, key_to_id](const Point2& p) -> int {
    const std::vector<std::size_t> nk = layout.nearest_k(p, k);
    std::vector<int> key(nk.begin(), nk.end());
    const auto it = key_to_id.find(key);
    return it == key_to_id.end() ? -1 : it->second;
  };
}

/// K-means clusters have no geometric definition; a point belongs to the
/// cluster whose centroid is nearest to the point's noiseless expected RSS
/// vector under the given channel parameters.
inline SpatialClassifier kmeans_classifier(const ApLayout& layout, const ChannelParams& params,
                                           const std::vector<std::vector<double>>& centroids) {
  return [layout, params, centroids](const Point2& p) -> int {
    std::vector<double> rss(layout.size());
    for (std::size_t j = 0; j < layout.size(); ++j) {
      rss[j] = mean_rss(params, std::max(distance(p, layout.positions[j]), 1e-9));
    }
    return nearest_centroid(rss, centroids);
  };
}

/// Room-polygon classifier for externally labeled data.
inline SpatialClassifier room_classifier(const std::vector<std::pair<int, Polygon>>& rooms) {
  return [rooms](const Point2& p) -> int {
    for (const auto& [id, poly] : rooms) {
      if (point_in_polygon(p, poly)) return id;
    }
    return -1;
  };
}

/// Trains per-cluster CDFs from a labeled grouping of the training vectors.
/// Undersized clusters are merged into the cluster with the nearest mean
/// RSS vector before any CDF is built.
inline CdfModel train_cdf_model(const RssDataset& train, const ClusterAssignment& assignment,
                                const Region& region, const LocationPrior& prior,
                                const ApLayout& layout, const SpatialClassifier& classify,
                                const CdfModelOptions& opts, std::uint64_t seed) {
  train.validate();
  if (assignment.labels.size() != train.size()) {
    throw std::invalid_argument("assignment length does not match dataset");
  }
  const std::size_t n = train.n_aps();

  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (assignment.labels[i] >= 0) groups[assignment.labels[i]].push_back(i);
  }
  if (groups.empty()) throw empty_cluster_error("no assignable vectors in training set");

  auto group_mean = [&](const std::vector<std::size_t>& members) {
    std::vector<double> mean(n, 0.0);
    for (std::size_t i : members) {
      for (std::size_t j = 0; j < n; ++j) mean[j] += train.vectors[i].values[j];
    }
    for (double& v : mean) v /= static_cast<double>(members.size());
    return mean;
  };

  CdfModel model;

  // merge pass: fold small groups into the large group with nearest mean RSS
  struct Group {
    std::vector<int> labels;
    std::vector<std::size_t> members;
  };
  std::vector<Group> big;
  std::vector<Group> small;
  for (auto& [label, members] : groups) {
    Group g{{label}, members};
    (members.size() >= opts.min_cluster_size ? big : small).push_back(std::move(g));
  }
  if (big.empty()) {
    // nothing survives on its own: collapse everything into one cluster
    Group all;
    for (Group& g : small) {
      all.labels.insert(all.labels.end(), g.labels.begin(), g.labels.end());
      all.members.insert(all.members.end(), g.members.begin(), g.members.end());
    }
    model.warnings.push_back("all clusters undersized; merged into one");
    big.push_back(std::move(all));
  } else {
    for (Group& g : small) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      const std::vector<double> gm = group_mean(g.members);
      for (std::size_t c = 0; c < big.size(); ++c) {
        const double d = detail::sq_dist(gm, group_mean(big[c].members));
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      model.warnings.push_back("cluster " + std::to_string(g.labels.front()) + " undersized (" +
                               std::to_string(g.members.size()) + "); merged into cluster " +
                               std::to_string(big[best].labels.front()));
      big[best].labels.insert(big[best].labels.end(), g.labels.begin(), g.labels.end());
      big[best].members.insert(big[best].members.end(), g.members.begin(), g.members.end());
    }
  }

  std::map<int, std::size_t> label_map;
  for (std::size_t c = 0; c < big.size(); ++c) {
    CdfModel::Cluster cluster;
    cluster.base_labels = big[c].labels;
    std::sort(cluster.base_labels.begin(), cluster.base_labels.end());
    cluster.mean_rss = group_mean(big[c].members);
    auto accept = [&cluster, &classify](const Point2& p) {
      return std::binary_search(cluster.base_labels.begin(), cluster.base_labels.end(),
                                classify(p));
    };
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<double> rss;
      rss.reserve(big[c].members.size());
      for (std::size_t i : big[c].members) rss.push_back(train.vectors[i].values[j]);
      cluster.rss_cdfs.push_back(ecdf_build(std::move(rss)));
      cluster.dist_cdfs.push_back(distance_cdf(region, prior, accept, layout.positions[j],
                                               opts.dist_cdf_samples,
                                               derive_seed(seed, c * n + j)));
    }
    for (int label : cluster.base_labels) label_map[label] = c;
    model.clusters.push_back(std::move(cluster));
  }
  model.set_label_map(std::move(label_map));
  return model;
}

/// Algorithm-style RSS conversion: train the per-cluster CDFs on the given
/// dataset and convert every one of its entries, yielding an m x n distance
/// table.
inline DistanceEstimateSet algorithm1_convert(const RssDataset& dataset,
                                              const ClusterAssignment& assignment,
                                              const Region& region, const LocationPrior& prior,
                                              const ApLayout& layout,
                                              const SpatialClassifier& classify,
                                              const CdfModelOptions& opts, std::uint64_t seed) {
  const CdfModel model =
      train_cdf_model(dataset, assignment, region, prior, layout, classify, opts, seed);
  DistanceEstimateSet out;
  out.source = DistanceSource::CDF;
  out.warnings = model.warnings;
  out.distances.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const std::size_t c = model.route(assignment.labels[i], dataset.vectors[i]);
    out.distances.push_back(model.convert(c, dataset.vectors[i]));
  }
  return out;
}

}  // namespace crowdloc
