#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "crowdloc/cdf_model.hpp"
#include "crowdloc/channel.hpp"
#include "crowdloc/clustering.hpp"
#include "crowdloc/errors.hpp"
#include "crowdloc/io.hpp"
#include "crowdloc/localization.hpp"

namespace crowdloc {

enum class Method { CdfVc, CdfKvc, CdfKmeans, Ldpl, Knn };

inline std::string method_name(Method m) {
  switch (m) {
    case Method::CdfVc: return "cdf-vc";
    case Method::CdfKvc: return "cdf-kvc";
    case Method::CdfKmeans: return "cdf-kmeans";
    case Method::Ldpl: return "ldpl";
    case Method::Knn: return "knn";
  }
  return "?";
}

inline Method method_from_name(const std::string& s) {
  if (s == "cdf-vc") return Method::CdfVc;
  if (s == "cdf-kvc") return Method::CdfKvc;
  if (s == "cdf-kmeans") return Method::CdfKmeans;
  if (s == "ldpl") return Method::Ldpl;
  if (s == "knn") return Method::Knn;
  throw std::invalid_argument("unknown method '" + s + "'");
}

struct PipelineOptions {
  std::size_t k = 3;           // KVC order, K-means k, or kNN neighbor count
  bool knn_weighted = false;
  double ldpl_l_ref = 0.0;     // 0 -> scene diameter
  CdfModelOptions cdf;
  bool clamp_to_region = true;
  ChannelParams params;        // channel assumption for the K-means classifier
  std::size_t kmeans_max_iter = 100;
};

struct SplitDataset {
  RssDataset train;
  RssDataset test;
};

/// Seeded-shuffle split: first `frac` of the shuffled indices train, the
/// rest test.
inline SplitDataset split_dataset(const RssDataset& ds, double frac, std::uint64_t seed) {
  ds.validate();
  if (!(frac > 0.0 && frac < 1.0)) throw std::invalid_argument("split fraction not in (0,1)");
  std::vector<std::size_t> idx(ds.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng = make_rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  const std::size_t n_train = std::max<std::size_t>(
      1, static_cast<std::size_t>(frac * static_cast<double>(ds.size())));
  SplitDataset out;
  out.train.ap_ids = out.test.ap_ids = ds.ap_ids;
  if (ds.truth) {
    out.train.truth = std::vector<Point2>{};
    out.test.truth = std::vector<Point2>{};
  }
  for (std::size_t r = 0; r < idx.size(); ++r) {
    RssDataset& dst = r < n_train ? out.train : out.test;
    dst.vectors.push_back(ds.vectors[idx[r]]);
    if (ds.truth) dst.truth->push_back((*ds.truth)[idx[r]]);
  }
  return out;
}

struct MethodResult {
  Method method = Method::CdfVc;
  std::vector<PositionEstimate> estimates;
  ErrorReport report;  // empty when the test set has no truth
  std::vector<std::string> warnings;
};

/// Runs one localization method: learn whatever the method needs from the
/// train split, localize every test vector, evaluate against test truth
/// when present.
inline MethodResult run_method(Method method, const Scene& scene, const RssDataset& train,
                               const RssDataset& test, const PipelineOptions& opts,
                               std::uint64_t seed) {
  train.validate();
  test.validate();
  MethodResult result;
  result.method = method;

  auto localize_all = [&](auto&& distance_for) {
    result.estimates.reserve(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) {
      PositionEstimate est = trilaterate(scene.layout, distance_for(i));
      if (opts.clamp_to_region) est.point = scene.region.clamp(est.point);
      result.estimates.push_back(est);
    }
  };

  switch (method) {
    case Method::Knn: {
      if (!train.truth) throw std::invalid_argument("knn needs a labeled training set");
      for (std::size_t i = 0; i < test.size(); ++i) {
        result.estimates.push_back(
            knn_locate(train, test.vectors[i], opts.k, opts.knn_weighted));
      }
      break;
    }
    case Method::Ldpl: {
      const double l_ref = opts.ldpl_l_ref > 0.0 ? opts.ldpl_l_ref : scene.region.diameter();
      const LdplModel model = LdplModel::fit(train, l_ref);
      localize_all([&](std::size_t i) { return model.convert_vector(test.vectors[i]); });
      break;
    }
    case Method::CdfVc: {
      const ClusterAssignment assignment = assign_max_rss(train);
      const CdfModel model =
          train_cdf_model(train, assignment, scene.region, scene.prior, scene.layout,
                          vc_classifier(scene.layout), opts.cdf, derive_seed(seed, 10));
      result.warnings = model.warnings;
      const ClusterAssignment test_assign = assign_max_rss(test);
      localize_all([&](std::size_t i) {
        const std::size_t c = model.route(test_assign.labels[i], test.vectors[i]);
        return model.convert(c, test.vectors[i]);
      });
      break;
    }
    case Method::CdfKvc: {
      const KvcAssignment kvc = assign_kvc(train, opts.k);
      const CdfModel model = train_cdf_model(
          train, kvc.assignment, scene.region, scene.prior, scene.layout,
          kvc_classifier(scene.layout, opts.k, kvc.keys), opts.cdf, derive_seed(seed, 10));
      result.warnings = model.warnings;
      // map test keys through the training key table; unseen keys fall back
      // to the nearest cluster mean
      std::map<std::vector<int>, int> key_to_id;
      for (std::size_t c = 0; c < kvc.keys.size(); ++c) {
        key_to_id[kvc.keys[c]] = static_cast<int>(c);
      }
      localize_all([&](std::size_t i) {
        const std::vector<int> key = top_k_key(test.vectors[i], opts.k);
        const auto it = key_to_id.find(key);
        const int label = it == key_to_id.end() ? -1 : it->second;
        const std::size_t c = model.route(label, test.vectors[i]);
        return model.convert(c, test.vectors[i]);
      });
      break;
    }
    case Method::CdfKmeans: {
      const KMeansResult km =
          assign_kmeans(train, opts.k, opts.kmeans_max_iter, derive_seed(seed, 20));
      const CdfModel model = train_cdf_model(
          train, km.assignment, scene.region, scene.prior, scene.layout,
          kmeans_classifier(scene.layout, opts.params, km.centroids), opts.cdf,
          derive_seed(seed, 10));
      result.warnings = model.warnings;
      localize_all([&](std::size_t i) {
        const int label = nearest_centroid(test.vectors[i].values, km.centroids);
        const std::size_t c = model.route(label, test.vectors[i]);
        return model.convert(c, test.vectors[i]);
      });
      break;
    }
  }

  if (test.truth) result.report = evaluate(result.estimates, *test.truth);
  return result;
}

}  // namespace crowdloc
