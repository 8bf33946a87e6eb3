#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "crowdloc/channel.hpp"
#include "crowdloc/errors.hpp"
#include "crowdloc/geometry.hpp"
#include "crowdloc/localization.hpp"

namespace crowdloc {

/// Shortest round-trip decimal text for a double ('.' separator).
inline std::string fmt_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{}) throw io_error("bad numeric field: '" + s + "'");
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

// ---- dataset CSV: header x,y,rss_<id1>,...  (x,y optional) ----

inline void write_dataset_csv(const RssDataset& ds, const std::filesystem::path& path) {
  ds.validate();
  std::ofstream f(path);
  if (!f) throw io_error("cannot open for writing: " + path.string());
  if (ds.truth) f << "x,y";
  for (std::size_t j = 0; j < ds.ap_ids.size(); ++j) {
    if (j > 0 || ds.truth) f << ',';
    f << "rss_" << ds.ap_ids[j];
  }
  f << '\n';
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.truth) {
      f << fmt_double((*ds.truth)[i].x) << ',' << fmt_double((*ds.truth)[i].y);
    }
    for (std::size_t j = 0; j < ds.ap_ids.size(); ++j) {
      if (j > 0 || ds.truth) f << ',';
      f << fmt_double(ds.vectors[i].values[j]);
    }
    f << '\n';
  }
}

inline RssDataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw io_error("cannot open: " + path.string());
  std::string line;
  if (!std::getline(f, line)) throw io_error("empty dataset file: " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line);
  RssDataset ds;
  bool has_truth = false;
  std::size_t rss_start = 0;
  if (header.size() >= 2 && header[0] == "x" && header[1] == "y") {
    has_truth = true;
    rss_start = 2;
  }
  for (std::size_t j = rss_start; j < header.size(); ++j) {
    if (header[j].rfind("rss_", 0) != 0) {
      throw io_error("unexpected dataset column '" + header[j] + "'");
    }
    ds.ap_ids.push_back(header[j].substr(4));
  }
  if (has_truth) ds.truth = std::vector<Point2>{};
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw io_error("dataset row has " + std::to_string(fields.size()) + " fields, expected " +
                     std::to_string(header.size()));
    }
    if (has_truth) {
      ds.truth->push_back({parse_double(fields[0]), parse_double(fields[1])});
    }
    RssVector v;
    for (std::size_t j = rss_start; j < fields.size(); ++j) {
      v.values.push_back(parse_double(fields[j]));
    }
    ds.vectors.push_back(std::move(v));
  }
  ds.validate();
  return ds;
}

// ---- AP CSV: id,x,y ----

inline void write_ap_csv(const ApLayout& layout, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw io_error("cannot open for writing: " + path.string());
  f << "id,x,y\n";
  for (std::size_t j = 0; j < layout.size(); ++j) {
    const std::string id = layout.ids.empty() ? "ap" + std::to_string(j) : layout.ids[j];
    f << id << ',' << fmt_double(layout.positions[j].x) << ','
      << fmt_double(layout.positions[j].y) << '\n';
  }
}

inline ApLayout read_ap_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw io_error("cannot open: " + path.string());
  std::string line;
  std::getline(f, line);  // header
  ApLayout layout;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != 3) throw io_error("bad AP row: " + line);
    layout.ids.push_back(fields[0]);
    layout.positions.push_back({parse_double(fields[1]), parse_double(fields[2])});
  }
  layout.validate();
  return layout;
}

// ---- scene JSON ----

struct Scene {
  Region region;
  ApLayout layout;
  LocationPrior prior;
  std::vector<std::pair<int, Polygon>> rooms;  // optional side-information polygons
};

inline Polygon parse_polygon(const nlohmann::json& j) {
  Polygon poly;
  for (const auto& v : j) poly.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
  return poly;
}

inline Scene load_scene(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw io_error("cannot open scene: " + path.string());
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw io_error("bad scene JSON: " + std::string(e.what()));
  }
  Scene scene;
  scene.region.boundary = parse_polygon(j.at("boundary"));
  if (j.contains("holes")) {
    for (const auto& h : j["holes"]) scene.region.holes.push_back(parse_polygon(h));
  }
  for (const auto& ap : j.at("aps")) {
    scene.layout.ids.push_back(ap.at("id").is_string() ? ap["id"].get<std::string>()
                                                       : std::to_string(ap["id"].get<int>()));
    scene.layout.positions.push_back({ap.at("x").get<double>(), ap.at("y").get<double>()});
  }
  if (j.contains("prior")) {
    const auto& p = j["prior"];
    const std::string kind = p.value("kind", "uniform");
    if (kind == "uniform") {
      scene.prior.kind = LocationPrior::Kind::Uniform;
    } else if (kind == "grid") {
      scene.prior.kind = LocationPrior::Kind::Grid;
      scene.prior.cell = p.at("cell").get<double>();
      for (const auto& row : p.at("weights")) {
        scene.prior.weights.push_back(row.get<std::vector<double>>());
      }
    } else {
      throw io_error("unknown prior kind '" + kind + "'");
    }
  }
  if (j.contains("rooms")) {
    for (const auto& r : j["rooms"]) {
      scene.rooms.emplace_back(r.at("id").get<int>(), parse_polygon(r.at("polygon")));
    }
  }
  scene.region.validate();
  scene.layout.validate();
  scene.prior.validate(scene.region);
  return scene;
}

// ---- error report CSV + summary JSON ----

inline void write_error_report(const ErrorReport& rep, const std::filesystem::path& csv_path,
                               const std::filesystem::path& json_path) {
  {
    std::ofstream f(csv_path);
    if (!f) throw io_error("cannot open for writing: " + csv_path.string());
    f << "error_m\n";
    for (double e : rep.errors) f << fmt_double(e) << '\n';
  }
  nlohmann::json j;
  j["median"] = rep.median;
  j["p67"] = rep.p67;
  j["p90"] = rep.p90;
  j["p95"] = rep.p95;
  j["mean"] = rep.mean;
  std::ofstream f(json_path);
  if (!f) throw io_error("cannot open for writing: " + json_path.string());
  f << j.dump(2) << '\n';
}

inline ErrorReport read_error_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw io_error("cannot open: " + path.string());
  std::string line;
  std::getline(f, line);  // header
  std::vector<double> errors;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) errors.push_back(parse_double(line));
  }
  std::sort(errors.begin(), errors.end());
  ErrorReport rep;
  rep.errors = std::move(errors);
  rep.mean = rep.errors.empty() ? 0.0
                                : std::accumulate(rep.errors.begin(), rep.errors.end(), 0.0) /
                                      static_cast<double>(rep.errors.size());
  rep.median = rep.quantile(0.50);
  rep.p67 = rep.quantile(0.67);
  rep.p90 = rep.quantile(0.90);
  rep.p95 = rep.quantile(0.95);
  return rep;
}

/// Debug dump of a CDF as `value,position` rows.
inline void write_cdf_csv(const EmpiricalCdf& cdf, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw io_error("cannot open for writing: " + path.string());
  f << "value,position\n";
  for (std::size_t i = 1; i <= cdf.size(); ++i) {
    f << fmt_double(cdf.sorted_values()[i - 1]) << ',' << fmt_double(cdf.position(i)) << '\n';
  }
}

}  // namespace crowdloc
