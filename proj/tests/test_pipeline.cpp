#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "crowdloc/crowdloc.hpp"

using namespace crowdloc;
namespace fs = std::filesystem;

namespace {

Scene small_scene() {
  Scene scene;
  scene.region = {{{0, 0}, {30, 0}, {30, 20}, {0, 20}}, {}};
  scene.layout = {{{4, 4}, {26, 4}, {4, 16}, {26, 16}, {15, 10}}, {}};
  scene.prior = {};
  return scene;
}

}  // namespace

TEST_CASE("scene JSON loads boundary, holes, APs, and prior") {
  const fs::path path = fs::temp_directory_path() / "crowdloc_scene.json";
  {
    std::ofstream f(path);
    f << R"({
      "boundary": [[0,0],[20,0],[20,10],[0,10]],
      "holes": [[[8,4],[12,4],[12,6],[8,6]]],
      "aps": [{"id":"a","x":2,"y":2},{"id":"b","x":18,"y":2},{"id":"c","x":10,"y":8}],
      "prior": {"kind":"grid","cell":5.0,"weights":[[1,2,1,2],[2,1,2,1]]},
      "rooms": [{"id":0,"polygon":[[0,0],[10,0],[10,10],[0,10]]}]
    })";
  }
  const Scene scene = load_scene(path);
  CHECK(scene.region.boundary.size() == 4);
  CHECK(scene.region.holes.size() == 1);
  CHECK(scene.layout.size() == 3);
  CHECK(scene.layout.ids[2] == "c");
  CHECK(scene.prior.kind == LocationPrior::Kind::Grid);
  CHECK(scene.prior.weights[1][3] == 1.0);
  CHECK(scene.rooms.size() == 1);
  CHECK(!scene.region.contains({10, 5}));  // inside the hole
}

TEST_CASE("split is deterministic and covers the dataset") {
  Scene scene = small_scene();
  ChannelParams params;
  const RssDataset ds =
      generate_2d_dataset(scene.region, scene.prior, scene.layout, params, 101, 3);
  const SplitDataset s1 = split_dataset(ds, 0.5, 42);
  const SplitDataset s2 = split_dataset(ds, 0.5, 42);
  CHECK(s1.train.size() + s1.test.size() == ds.size());
  CHECK(s1.train.size() == 50);
  for (std::size_t i = 0; i < s1.train.size(); ++i) {
    CHECK(s1.train.vectors[i].values == s2.train.vectors[i].values);
  }
  CHECK_THROWS_AS(split_dataset(ds, 1.5, 1), std::invalid_argument);
}

TEST_CASE("single-cluster conversion reduces to reconstruct_case3") {
  // 1D strip scene with one AP at the origin: one cluster over the whole
  // region makes Algorithm-style conversion identical to the case-3 path.
  const double d0 = 2.0, d_max = 25.0;
  Scene scene;
  scene.region = {{{d0, -0.005}, {d_max, -0.005}, {d_max, 0.005}, {d0, 0.005}}, {}};
  scene.layout = {{{0, 0}}, {"ap0"}};
  scene.prior = {};

  ChannelParams params;
  params.noise_sigma = 0.0;
  RssDataset ds;
  ds.ap_ids = {"ap0"};
  {
    const Dataset1d gen =
        generate_1d_dataset(params, Placement1d::UniformRandom, 300, d0, d_max, 0, 0, 9);
    ds = gen.dataset;
  }

  const ClusterAssignment one = assign_external(ds, std::vector<int>(ds.size(), 0));
  CdfModelOptions opts;
  const std::uint64_t seed = 123;
  const DistanceEstimateSet converted = algorithm1_convert(
      ds, one, scene.region, scene.prior, scene.layout,
      [](const Point2&) { return 0; }, opts, seed);
  REQUIRE(converted.distances.size() == ds.size());

  // reference: identical distance CDF (same derived seed), case-3 transform
  const DistanceCdf f_d = distance_cdf(scene.region, scene.prior, scene.layout.positions[0],
                                       opts.dist_cdf_samples, derive_seed(seed, 0));
  std::vector<double> rss;
  for (const RssVector& v : ds.vectors) rss.push_back(v.values[0]);
  const std::vector<double> expected = reconstruct_case3(rss, f_d);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(converted.distances[i][0] == doctest::Approx(expected[i]).epsilon(1e-12));
  }
}

TEST_CASE("conversion emits one distance per (vector, AP)") {
  Scene scene = small_scene();
  ChannelParams params;
  params.sigma_chi = 4.0;
  const RssDataset ds =
      generate_2d_dataset(scene.region, scene.prior, scene.layout, params, 400, 5);
  const ClusterAssignment a = assign_max_rss(ds);
  CdfModelOptions opts;
  opts.dist_cdf_samples = 2000;
  const DistanceEstimateSet est =
      algorithm1_convert(ds, a, scene.region, scene.prior, scene.layout,
                         vc_classifier(scene.layout), opts, 1);
  REQUIRE(est.distances.size() == ds.size());
  for (const auto& row : est.distances) CHECK(row.size() == scene.layout.size());
}

TEST_CASE("noiseless VC conversion recovers true distances to within 0.5 m") {
  Scene scene = small_scene();
  ChannelParams params;
  params.sigma_chi = 0.0;
  params.noise_sigma = 0.0;
  const RssDataset ds =
      generate_2d_dataset(scene.region, scene.prior, scene.layout, params, 2000, 7);
  const ClusterAssignment a = assign_max_rss(ds);
  CdfModelOptions opts;
  const DistanceEstimateSet est =
      algorithm1_convert(ds, a, scene.region, scene.prior, scene.layout,
                         vc_classifier(scene.layout), opts, 2);
  std::vector<double> abs_err;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = 0; j < scene.layout.size(); ++j) {
      const double true_d = distance((*ds.truth)[i], scene.layout.positions[j]);
      abs_err.push_back(std::abs(est.distances[i][j] - true_d));
    }
  }
  std::sort(abs_err.begin(), abs_err.end());
  CHECK(abs_err[abs_err.size() / 2] <= 0.5);
}

TEST_CASE("undersized clusters are merged with a warning") {
  Scene scene = small_scene();
  ChannelParams params;
  const RssDataset ds =
      generate_2d_dataset(scene.region, scene.prior, scene.layout, params, 120, 8);
  // labels: almost everything in cluster 0, a few strays in cluster 1
  std::vector<int> labels(ds.size(), 0);
  labels[0] = labels[1] = labels[2] = 1;
  const ClusterAssignment a = assign_external(ds, labels);
  CdfModelOptions opts;
  opts.min_cluster_size = 20;
  opts.dist_cdf_samples = 500;
  const CdfModel model =
      train_cdf_model(ds, a, scene.region, scene.prior, scene.layout,
                      [](const Point2&) { return 0; }, opts, 3);
  CHECK(model.clusters.size() == 1);
  CHECK(!model.warnings.empty());
  CHECK(model.cluster_of_label(1) == model.cluster_of_label(0));
}

TEST_CASE("every pipeline method runs end to end on a small scene") {
  Scene scene = small_scene();
  ChannelParams params;
  params.sigma_chi = 4.0;
  const RssDataset ds =
      generate_2d_dataset(scene.region, scene.prior, scene.layout, params, 600, 19);
  const SplitDataset split = split_dataset(ds, 0.5, 4);
  PipelineOptions opts;
  opts.cdf.dist_cdf_samples = 2000;
  opts.params = params;
  for (Method m : {Method::CdfVc, Method::CdfKvc, Method::CdfKmeans, Method::Ldpl, Method::Knn}) {
    const MethodResult res = run_method(m, scene, split.train, split.test, opts, 6);
    CHECK(res.estimates.size() == split.test.size());
    CHECK(res.report.errors.size() == split.test.size());
    for (const PositionEstimate& est : res.estimates) {
      if (m != Method::Knn) CHECK(scene.region.contains(scene.region.clamp(est.point)));
    }
    CHECK(res.report.median < scene.region.diameter());
  }
}
