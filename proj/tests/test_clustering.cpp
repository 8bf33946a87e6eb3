#include <doctest.h>

#include <set>
#include <vector>

#include "crowdloc/cdf_model.hpp"
#include "crowdloc/clustering.hpp"

using namespace crowdloc;

namespace {

RssDataset make_dataset(std::vector<std::vector<double>> rows, std::size_t n_aps) {
  RssDataset ds;
  for (std::size_t j = 0; j < n_aps; ++j) ds.ap_ids.push_back("ap" + std::to_string(j));
  for (auto& r : rows) ds.vectors.push_back({std::move(r)});
  return ds;
}

}  // namespace

TEST_CASE("max-RSS assignment and tie break") {
  const RssDataset ds = make_dataset({{-40, -50, -60}, {-40, -40, -60}}, 3);
  const ClusterAssignment a = assign_max_rss(ds);
  CHECK(a.labels[0] == 0);
  CHECK(a.labels[1] == 0);  // tie to lowest AP index
}

TEST_CASE("all-sentinel vectors are reported unassignable") {
  const RssDataset ds = make_dataset({{-40, -50}, {kRssFloor, kRssFloor}}, 2);
  const ClusterAssignment a = assign_max_rss(ds);
  CHECK(a.labels[1] == -1);
  REQUIRE(a.unassigned.size() == 1);
  CHECK(a.unassigned[0] == 1);
}

TEST_CASE("max-RSS is invariant under a common offset") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-90.0, -30.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> v(5);
    for (double& x : v) x = u(rng);
    std::vector<double> shifted = v;
    for (double& x : shifted) x += 7.5;
    const ClusterAssignment a = assign_max_rss(make_dataset({v}, 5));
    const ClusterAssignment b = assign_max_rss(make_dataset({shifted}, 5));
    CHECK(a.labels[0] == b.labels[0]);
  }
}

TEST_CASE("KVC with k=1 reduces to max-RSS") {
  Region region{{{0, 0}, {30, 0}, {30, 20}, {0, 20}}, {}};
  LocationPrior prior;
  ApLayout layout{{{5, 5}, {25, 5}, {5, 15}, {25, 15}}, {}};
  ChannelParams params;
  params.sigma_chi = 2.0;
  const RssDataset ds = generate_2d_dataset(region, prior, layout, params, 300, 6);

  const ClusterAssignment vc = assign_max_rss(ds);
  const KvcAssignment kvc = assign_kvc(ds, 1);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    REQUIRE(kvc.assignment.labels[i] >= 0);
    const std::vector<int>& key = kvc.keys[kvc.assignment.labels[i]];
    REQUIRE(key.size() == 1);
    CHECK(key[0] == vc.labels[i]);
  }
}

TEST_CASE("KVC key example") {
  const RssDataset ds = make_dataset({{-40, -50, -60}}, 3);
  const KvcAssignment kvc = assign_kvc(ds, 2);
  CHECK(kvc.keys[kvc.assignment.labels[0]] == std::vector<int>{0, 1});
}

TEST_CASE("noiseless data: top-k RSS set equals the k nearest APs") {
  Region region{{{0, 0}, {30, 0}, {30, 20}, {0, 20}}, {}};
  LocationPrior prior;
  ApLayout layout{{{4, 4}, {26, 4}, {4, 16}, {26, 16}, {15, 10}}, {}};
  ChannelParams params;
  params.sigma_chi = 0.0;
  params.noise_sigma = 0.0;
  const RssDataset ds = generate_2d_dataset(region, prior, layout, params, 400, 14);

  // geometric oracle: Voronoi membership for k=1
  const ClusterAssignment vc = assign_max_rss(ds);
  const Partition part = voronoi_partition(layout, region);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(vc.labels[i] == part.cell_of((*ds.truth)[i]));
  }

  const std::size_t k = 3;
  const KvcAssignment kvc = assign_kvc(ds, k);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const std::vector<std::size_t> nearest = layout.nearest_k((*ds.truth)[i], k);
    const std::vector<int> expected(nearest.begin(), nearest.end());
    CHECK(kvc.keys[kvc.assignment.labels[i]] == expected);
  }
}

TEST_CASE("k-means with k=1 returns the coordinate-wise mean") {
  const RssDataset ds = make_dataset({{-40, -60}, {-50, -70}, {-60, -80}}, 2);
  const KMeansResult km = assign_kmeans(ds, 1, 50, 1);
  CHECK(km.centroids[0][0] == doctest::Approx(-50.0));
  CHECK(km.centroids[0][1] == doctest::Approx(-70.0));
  for (int l : km.assignment.labels) CHECK(l == 0);
}

TEST_CASE("k-means recovers well-separated blobs") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> jitter(0.0, 0.5);
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 50; ++i) rows.push_back({-40 + jitter(rng), -80 + jitter(rng)});
  for (int i = 0; i < 50; ++i) rows.push_back({-80 + jitter(rng), -40 + jitter(rng)});
  const RssDataset ds = make_dataset(std::move(rows), 2);
  const KMeansResult km = assign_kmeans(ds, 2, 100, 3);
  for (int i = 1; i < 50; ++i) CHECK(km.assignment.labels[i] == km.assignment.labels[0]);
  for (int i = 51; i < 100; ++i) CHECK(km.assignment.labels[i] == km.assignment.labels[50]);
  CHECK(km.assignment.labels[0] != km.assignment.labels[50]);
}

TEST_CASE("k-means objective is non-increasing with iteration budget") {
  Region region{{{0, 0}, {30, 0}, {30, 20}, {0, 20}}, {}};
  LocationPrior prior;
  ApLayout layout{{{5, 5}, {25, 5}, {15, 15}}, {}};
  ChannelParams params;
  const RssDataset ds = generate_2d_dataset(region, prior, layout, params, 300, 8);
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t iters = 1; iters <= 6; ++iters) {
    const KMeansResult km = assign_kmeans(ds, 4, iters, 11);
    CHECK(km.objective <= prev + 1e-9);
    prev = km.objective;
  }
}

TEST_CASE("external labels pass through") {
  const RssDataset ds = make_dataset({{-40}, {-50}, {-60}}, 1);
  const ClusterAssignment a = assign_external(ds, {2, 2, 2});
  for (int l : a.labels) CHECK(l == 2);
  CHECK_THROWS_AS(assign_external(ds, {1, 2}), std::invalid_argument);
}

TEST_CASE("room labels agree with the point-in-polygon oracle") {
  Region region{{{0, 0}, {20, 0}, {20, 10}, {0, 10}}, {}};
  LocationPrior prior;
  ApLayout layout{{{5, 5}, {15, 5}, {10, 9}}, {}};
  ChannelParams params;
  const RssDataset ds = generate_2d_dataset(region, prior, layout, params, 200, 31);

  const std::vector<std::pair<int, Polygon>> rooms = {
      {0, {{0, 0}, {10, 0}, {10, 10}, {0, 10}}},
      {1, {{10, 0}, {20, 0}, {20, 10}, {10, 10}}}};
  const SpatialClassifier classify = room_classifier(rooms);
  std::vector<int> labels;
  for (const Point2& p : *ds.truth) labels.push_back(classify(p));
  const ClusterAssignment a = assign_external(ds, labels);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    REQUIRE(a.labels[i] >= 0);
    CHECK(point_in_polygon((*ds.truth)[i], rooms[a.labels[i]].second));
  }
}
