// crowdloc: calibration-free indoor localization from unlabeled RSS data.
//
// Subcommands:
//   generate    synthesize a crowdsourced dataset for a scene
//   localize    run the cluster -> convert -> trilaterate pipeline + baselines
//   case-study  1D reconstruction tables (cases 1-3)
//   ingest      normalize an external tabular file to the dataset schema
//   report      summarize an error CSV

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "crowdloc/crowdloc.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "crowdloc 0.1.0";

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream f(path);
  if (!f) throw crowdloc::io_error("cannot open config: " + path);
  json j;
  f >> j;
  // a manifest is itself a valid config source
  if (j.contains("config")) return j["config"];
  return j;
}

crowdloc::ChannelParams channel_from_json(const json& j) {
  crowdloc::ChannelParams p;
  p.pt = j.value("pt", p.pt);
  p.k = j.value("k", p.k);
  p.gamma = j.value("gamma", p.gamma);
  p.d0 = j.value("d0", p.d0);
  p.sigma_chi = j.value("sigma_chi", p.sigma_chi);
  p.xc = j.value("xc", p.xc);
  p.noise_sigma = j.value("noise_sigma", p.noise_sigma);
  p.validate();
  return p;
}

void write_manifest(const fs::path& out_dir, const std::string& command, const json& config,
                    const std::vector<std::string>& outputs) {
  json m;
  m["version"] = kVersion;
  m["command"] = command;
  m["config"] = config;
  m["outputs"] = outputs;
  std::ofstream f(out_dir / "manifest.json");
  f << m.dump(2) << '\n';
}

int cmd_generate(const json& cfg) {
  const std::string scene_path = cfg.at("scene").get<std::string>();
  const crowdloc::Scene scene = crowdloc::load_scene(scene_path);
  const crowdloc::ChannelParams params = channel_from_json(cfg.value("channel", json::object()));
  const std::size_t m = cfg.at("m").get<std::size_t>();
  const std::uint64_t seed = cfg.value("seed", 0ull);
  const fs::path out_dir = cfg.value("out", std::string("out"));
  fs::create_directories(out_dir);

  crowdloc::Gen2dOptions gopts;
  gopts.shadowing_batch_cap = cfg.value("shadowing_batch_cap", gopts.shadowing_batch_cap);
  const crowdloc::RssDataset ds =
      crowdloc::generate_2d_dataset(scene.region, scene.prior, scene.layout, params, m, seed, gopts);
  crowdloc::write_dataset_csv(ds, out_dir / "dataset.csv");
  crowdloc::write_ap_csv(scene.layout, out_dir / "aps.csv");
  write_manifest(out_dir, "generate", cfg, {"dataset.csv", "aps.csv"});
  std::cout << "wrote " << (out_dir / "dataset.csv").string() << " (" << ds.size() << " rows, "
            << ds.n_aps() << " APs)\n";
  return 0;
}

int cmd_localize(const json& cfg) {
  const crowdloc::Scene scene = crowdloc::load_scene(cfg.at("scene").get<std::string>());
  const std::uint64_t seed = cfg.value("seed", 0ull);
  const fs::path out_dir = cfg.value("out", std::string("out"));
  fs::create_directories(out_dir);

  crowdloc::RssDataset train, test;
  if (cfg.contains("train") && cfg.contains("test")) {
    train = crowdloc::read_dataset_csv(cfg["train"].get<std::string>());
    test = crowdloc::read_dataset_csv(cfg["test"].get<std::string>());
  } else {
    const crowdloc::RssDataset full =
        crowdloc::read_dataset_csv(cfg.at("dataset").get<std::string>());
    const double frac = cfg.value("split", 0.5);
    crowdloc::SplitDataset split =
        crowdloc::split_dataset(full, frac, crowdloc::derive_seed(seed, 1));
    train = std::move(split.train);
    test = std::move(split.test);
  }

  crowdloc::PipelineOptions opts;
  opts.k = cfg.value("k", opts.k);
  opts.knn_weighted = cfg.value("knn_weighted", opts.knn_weighted);
  opts.ldpl_l_ref = cfg.value("ldpl_l_ref", opts.ldpl_l_ref);
  opts.clamp_to_region = cfg.value("clamp", opts.clamp_to_region);
  opts.cdf.min_cluster_size = cfg.value("min_cluster", opts.cdf.min_cluster_size);
  opts.cdf.dist_cdf_samples = cfg.value("dist_cdf_samples", opts.cdf.dist_cdf_samples);
  opts.params = channel_from_json(cfg.value("channel", json::object()));

  std::vector<std::string> methods;
  if (cfg.contains("methods")) {
    methods = cfg["methods"].get<std::vector<std::string>>();
  } else {
    methods = {cfg.value("method", std::string("cdf-vc"))};
  }

  std::vector<std::string> outputs;
  json combined;
  for (const std::string& name : methods) {
    const crowdloc::Method method = crowdloc::method_from_name(name);
    const crowdloc::MethodResult res =
        crowdloc::run_method(method, scene, train, test, opts, seed);
    for (const std::string& w : res.warnings) std::cerr << "warning: " << name << ": " << w << '\n';
    const std::string csv = "errors_" + name + ".csv";
    const std::string js = "summary_" + name + ".json";
    crowdloc::write_error_report(res.report, out_dir / csv, out_dir / js);
    outputs.push_back(csv);
    outputs.push_back(js);
    combined[name] = {{"median", res.report.median}, {"p67", res.report.p67},
                      {"p90", res.report.p90},       {"p95", res.report.p95},
                      {"mean", res.report.mean}};
    std::cout << name << ": median " << res.report.median << " m, p90 " << res.report.p90
              << " m, mean " << res.report.mean << " m\n";
  }
  {
    std::ofstream f(out_dir / "quantiles.json");
    f << combined.dump(2) << '\n';
    outputs.push_back("quantiles.json");
  }
  write_manifest(out_dir, "localize", cfg, outputs);
  return 0;
}

int cmd_case_study(const json& cfg) {
  const json cc = cfg.value("case", json::object());
  const int case_id = cc.value("id", cfg.value("case_id", 1));
  const std::size_t m = cc.value("m", 200);
  const double d0 = cc.value("d0", 2.0);
  const double d_max = cc.value("d_max", 25.0);
  const double alpha = cc.value("alpha", 2.0);
  const double beta = cc.value("beta", 2.0);
  const std::uint64_t seed = cfg.value("seed", 0ull);
  const crowdloc::ChannelParams params = channel_from_json(cfg.value("channel", json::object()));
  const fs::path out_dir = cfg.value("out", std::string("out"));
  fs::create_directories(out_dir);

  const crowdloc::CaseStudyResult res =
      crowdloc::run_case_study(case_id, params, m, d0, d_max, alpha, beta, seed);

  const std::string name = "case" + std::to_string(case_id) + ".csv";
  std::ofstream f(out_dir / name);
  f << (case_id == 3 ? "true_d,rss,est_ordering,est_cdf\n" : "true_d,rss,est_ordering\n");
  for (const crowdloc::CaseStudyRow& row : res.rows) {
    f << crowdloc::fmt_double(row.true_distance) << ',' << crowdloc::fmt_double(row.rss) << ','
      << crowdloc::fmt_double(row.est_ordering);
    if (case_id == 3) f << ',' << crowdloc::fmt_double(row.est_cdf);
    f << '\n';
  }
  write_manifest(out_dir, "case-study", cfg, {name});
  std::cout << "wrote " << (out_dir / name).string() << " (" << res.rows.size() << " rows)\n";
  return 0;
}

int cmd_ingest(const json& cfg) {
  const std::string in_path = cfg.at("in").get<std::string>();
  const fs::path out_path = cfg.value("out", std::string("dataset.csv"));
  const std::map<std::string, std::string> mapping =
      cfg.value("mapping", std::map<std::string, std::string>{});

  std::ifstream f(in_path);
  if (!f) throw crowdloc::io_error("cannot open: " + in_path);
  std::string line;
  if (!std::getline(f, line)) throw crowdloc::io_error("empty input file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = crowdloc::split_csv_line(line);

  // destination column -> source index
  auto source_index = [&](const std::string& dest) -> std::optional<std::size_t> {
    const auto it = mapping.find(dest);
    const std::string src = it == mapping.end() ? dest : it->second;
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == src) return i;
    }
    return std::nullopt;
  };

  // output schema: x,y (when mappable) then every mapped/passthrough rss_ column
  std::vector<std::string> dest_cols;
  std::vector<std::size_t> src_idx;
  for (const std::string& c : {std::string("x"), std::string("y")}) {
    if (auto i = source_index(c)) {
      dest_cols.push_back(c);
      src_idx.push_back(*i);
    }
  }
  for (const auto& [dest, src] : mapping) {
    if (dest == "x" || dest == "y") continue;
    bool found = false;
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == src) {
        dest_cols.push_back(dest);
        src_idx.push_back(i);
        found = true;
        break;
      }
    }
    if (!found) throw crowdloc::io_error("mapped column '" + src + "' missing from input");
  }
  if (mapping.empty()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i].rfind("rss_", 0) == 0) {
        dest_cols.push_back(header[i]);
        src_idx.push_back(i);
      }
    }
  }
  if (dest_cols.empty()) throw crowdloc::io_error("no usable columns after mapping");

  std::vector<bool> used(header.size(), false);
  for (std::size_t i : src_idx) used[i] = true;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (!used[i]) std::cerr << "warning: dropping unmapped column '" << header[i] << "'\n";
  }

  std::ofstream out(out_path);
  if (!out) throw crowdloc::io_error("cannot open for writing: " + out_path.string());
  for (std::size_t c = 0; c < dest_cols.size(); ++c) out << (c ? "," : "") << dest_cols[c];
  out << '\n';
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = crowdloc::split_csv_line(line);
    if (fields.size() != header.size()) throw crowdloc::io_error("ragged row: " + line);
    for (std::size_t c = 0; c < src_idx.size(); ++c) out << (c ? "," : "") << fields[src_idx[c]];
    out << '\n';
  }
  std::cout << "wrote " << out_path.string() << '\n';
  return 0;
}

int cmd_report(const json& cfg) {
  const crowdloc::ErrorReport rep =
      crowdloc::read_error_csv(cfg.at("in").get<std::string>());
  json j = {{"median", rep.median}, {"p67", rep.p67},   {"p90", rep.p90},
            {"p95", rep.p95},       {"mean", rep.mean}, {"count", rep.errors.size()}};
  if (cfg.contains("out")) {
    std::ofstream f(cfg["out"].get<std::string>());
    f << j.dump(2) << '\n';
  }
  std::cout << j.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(kVersion) +
               " - calibration-free indoor localization from unlabeled RSS data"};
  app.require_subcommand(1);

  std::string config_path, method, train_path, test_path, dataset_path, out_path, in_path;
  std::vector<std::string> map_entries;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> k, m;
  std::optional<double> split;
  std::optional<int> case_id;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file (flags override fields)");
    sub->add_option("--seed", seed, "RNG seed");
    sub->add_option("--out", out_path, "output directory or file");
  };

  CLI::App* generate = app.add_subcommand("generate", "synthesize a crowdsourced dataset");
  add_common(generate);
  generate->add_option("--m", m, "number of measurements");

  CLI::App* localize = app.add_subcommand("localize", "run localization methods");
  add_common(localize);
  localize->add_option("--method", method, "cdf-vc|cdf-kvc|cdf-kmeans|ldpl|knn");
  localize->add_option("--k", k, "cluster count / neighbor count");
  localize->add_option("--split", split, "train fraction in (0,1)");
  localize->add_option("--train", train_path, "training dataset CSV");
  localize->add_option("--test", test_path, "test dataset CSV");
  localize->add_option("--dataset", dataset_path, "single dataset CSV to split");

  CLI::App* case_study = app.add_subcommand("case-study", "1D reconstruction tables");
  add_common(case_study);
  case_study->add_option("--case", case_id, "1, 2, or 3");
  case_study->add_option("--m", m, "number of measurements");

  CLI::App* ingest = app.add_subcommand("ingest", "normalize an external tabular file");
  add_common(ingest);
  ingest->add_option("--in", in_path, "input tabular file");
  ingest->add_option("--map", map_entries, "column mapping dest=src (repeatable)");

  CLI::App* report = app.add_subcommand("report", "summarize an error CSV");
  add_common(report);
  report->add_option("--in", in_path, "error CSV (error_m column)");

  CLI11_PARSE(app, argc, argv);

  try {
    json cfg = load_config(config_path);
    if (seed) cfg["seed"] = *seed;
    if (!out_path.empty()) cfg["out"] = out_path;
    if (m) cfg["m"] = *m;
    if (k) cfg["k"] = *k;
    if (split) cfg["split"] = *split;
    if (!method.empty()) cfg["method"] = method, cfg.erase("methods");
    if (!train_path.empty()) cfg["train"] = train_path;
    if (!test_path.empty()) cfg["test"] = test_path;
    if (!dataset_path.empty()) cfg["dataset"] = dataset_path;
    if (!in_path.empty()) cfg["in"] = in_path;
    if (case_id) cfg["case_id"] = *case_id, cfg["case"]["id"] = *case_id;
    if (!map_entries.empty()) {
      json mapping = cfg.value("mapping", json::object());
      for (const std::string& e : map_entries) {
        const auto eq = e.find('=');
        if (eq == std::string::npos) throw crowdloc::io_error("bad --map entry: " + e);
        mapping[e.substr(0, eq)] = e.substr(eq + 1);
      }
      cfg["mapping"] = mapping;
    }

    if (generate->parsed()) return cmd_generate(cfg);
    if (localize->parsed()) return cmd_localize(cfg);
    if (case_study->parsed()) return cmd_case_study(cfg);
    if (ingest->parsed()) return cmd_ingest(cfg);
    if (report->parsed()) return cmd_report(cfg);
  } catch (const std::exception& e) {
    std::cerr << "{\"error\":" << json(e.what()).dump() << "}\n";
    return 1;
  }
  return 2;
}
