#include "hydrocast/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "format.hpp"

namespace hydrocast::cli {

namespace fs = std::filesystem;
using nlohmann::json;

Command parse_command(std::string_view name) {
  if (name == "synth") return Command::Synth;
  if (name == "cluster") return Command::Cluster;
  if (name == "forecast") return Command::Forecast;
  if (name == "benchmark") return Command::Benchmark;
  if (name == "report") return Command::Report;
  throw Error(Errc::ConfigError, "unknown command '" + std::string(name) + "'");
}

void RunConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(Errc::ConfigError, what); };
  if (input && synth) fail("--input and --synth are mutually exclusive");
  if (command == Command::Synth && input) fail("synth does not read an input file");
  if (command == Command::Report && !input) fail("report needs --input pointing at a report CSV");
  if ((command == Command::Cluster || command == Command::Forecast || command == Command::Benchmark) && !input &&
      !synth) {
    fail("a dataset is required: pass --input PATH or --synth CFG");
  }
  if ((command == Command::Forecast || command == Command::Benchmark) && presets.size() > 1) {
    fail("forecast and benchmark take a single preset");
  }
  if (!presets.empty() && cluster_params) fail("give either --preset or explicit cluster thresholds");
  for (const auto& name : presets) preset(name);
  if (cluster_params) cluster_params->validate();
  if (methods.empty()) fail("no methods selected");
  if (workers < 1) fail("workers must be at least 1");
  if (cluster_epochs < 0) fail("cluster_epochs must be non-negative");
  train.validate();
  if (synth) synth->validate();
}

namespace {

template <typename T>
void read_key(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(known.begin(), known.end(), [&](const char* k) { return key == k; }) == known.end()) {
      throw Error(Errc::ConfigError, where + ": unknown key '" + key + "'");
    }
  }
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigError, path.string() + ": " + e.what());
  }
}

Range read_range(const json& j) {
  const auto pair = j.get<std::vector<double>>();
  if (pair.size() != 2) throw Error(Errc::ConfigError, "ranges are [low, high] pairs");
  return {pair[0], pair[1]};
}

// Returns true when the block carried its own seed.
bool apply_synth(const json& j, SynthConfig& c) {
  reject_unknown(j,
                 {"n_series", "n_regions", "first_year", "last_year", "n_month_patterns", "base_level",
                  "seasonal_amplitude", "trend_slope", "noise_sd", "noise_spread", "n_archetypes",
                  "max_aggregation", "seed"},
                 "synth");
  read_key(j, "n_series", c.n_series);
  read_key(j, "n_regions", c.n_regions);
  read_key(j, "first_year", c.first_year);
  read_key(j, "last_year", c.last_year);
  read_key(j, "n_month_patterns", c.n_month_patterns);
  if (j.contains("base_level")) c.base_level = read_range(j.at("base_level"));
  if (j.contains("seasonal_amplitude")) c.seasonal_amplitude = read_range(j.at("seasonal_amplitude"));
  if (j.contains("trend_slope")) c.trend_slope = read_range(j.at("trend_slope"));
  read_key(j, "noise_sd", c.noise_sd);
  read_key(j, "noise_spread", c.noise_spread);
  read_key(j, "n_archetypes", c.n_archetypes);
  read_key(j, "max_aggregation", c.max_aggregation);
  read_key(j, "seed", c.seed);
  return j.contains("seed");
}

void apply_train(const json& j, TrainConfig& t) {
  reject_unknown(j,
                 {"epochs", "learning_rate", "beta1", "beta2", "adam_epsilon", "hidden_size", "window", "clip_norm"},
                 "train");
  read_key(j, "epochs", t.epochs);
  read_key(j, "learning_rate", t.learning_rate);
  read_key(j, "beta1", t.beta1);
  read_key(j, "beta2", t.beta2);
  read_key(j, "adam_epsilon", t.adam_epsilon);
  read_key(j, "hidden_size", t.hidden_size);
  read_key(j, "window", t.window);
  read_key(j, "clip_norm", t.clip_norm);
}

std::vector<Method> read_methods(const json& j) {
  if (j.is_string()) return parse_methods(j.get<std::string>());
  std::string joined;
  for (const auto& m : j) joined += m.get<std::string>() + ",";
  return parse_methods(joined);
}

RunConfig load_config_impl(const fs::path& path, Command command, bool& synth_seed) {
  const json j = read_json(path);
  RunConfig c;
  c.command = command;
  try {
    reject_unknown(j,
                   {"input", "synth", "preset", "cluster", "methods", "train", "cluster_epochs", "out", "seed",
                    "workers"},
                   path.string());
    if (j.contains("input")) c.input = fs::path(j.at("input").get<std::string>());
    if (j.contains("synth")) {
      c.synth = SynthConfig{};
      synth_seed = apply_synth(j.at("synth"), *c.synth);
    }
    if (j.contains("preset")) {
      const auto& p = j.at("preset");
      c.presets = p.is_string() ? std::vector<std::string>{p.get<std::string>()} : p.get<std::vector<std::string>>();
    }
    if (j.contains("cluster")) {
      const auto& cl = j.at("cluster");
      reject_unknown(cl, {"min_pts", "eps", "cos_threshold"}, "cluster");
      ClusterParams params;
      read_key(cl, "min_pts", params.min_pts);
      read_key(cl, "eps", params.eps);
      read_key(cl, "cos_threshold", params.cos_threshold);
      c.cluster_params = params;
    }
    if (j.contains("methods")) c.methods = read_methods(j.at("methods"));
    if (j.contains("train")) apply_train(j.at("train"), c.train);
    read_key(j, "cluster_epochs", c.cluster_epochs);
    if (j.contains("out")) c.out = fs::path(j.at("out").get<std::string>());
    read_key(j, "seed", c.seed);
    read_key(j, "workers", c.workers);
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigError, path.string() + ": " + e.what());
  }
  return c;
}

}  // namespace

RunConfig load_config(const fs::path& path, Command command) {
  bool synth_seed = false;
  auto c = load_config_impl(path, command, synth_seed);
  if (c.synth && !synth_seed) c.synth->seed = c.seed;
  return c;
}

SynthConfig load_synth_config(const fs::path& path) {
  SynthConfig c;
  try {
    apply_synth(read_json(path), c);
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigError, path.string() + ": " + e.what());
  }
  return c;
}

namespace {

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write '" + path.string() + "'");
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw Error(Errc::IoError, "write failed for '" + path.string() + "'");
}

Dataset load_dataset(const RunConfig& config) {
  if (config.input) return parse_dataset(*config.input);
  return generate_synthetic(*config.synth);
}

struct ClusterChoice {
  std::string name;
  ClusterParams params;
};

std::vector<ClusterChoice> cluster_choices(const RunConfig& config, bool default_all) {
  if (config.cluster_params) return {{"custom", *config.cluster_params}};
  std::vector<ClusterChoice> out;
  for (const auto& name : config.presets) out.push_back({name, preset(name)});
  if (out.empty()) {
    if (default_all) {
      for (const auto& p : kPresets) out.push_back({std::string(p.name), p.params});
    } else {
      out.push_back({"D1", preset("D1")});
    }
  }
  return out;
}

BenchmarkOptions benchmark_options(const RunConfig& config, const ClusterParams& params) {
  BenchmarkOptions options;
  options.methods = config.methods;
  options.cluster_params = params;
  options.train = config.train;
  options.cluster_epochs = config.cluster_epochs;
  options.seed = config.seed;
  options.workers = config.workers;
  return options;
}

std::size_t count_ok(const std::vector<ReportRow>& rows) {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.metrics; }));
}

void write_densities(const std::map<std::pair<Method, Metric>, DensityCurve>& curves, const fs::path& dir,
                     const std::string& prefix, std::vector<fs::path>& files) {
  for (const auto& [key, curve] : curves) {
    const auto path =
        dir / (prefix + std::string(to_string(key.first)) + "_" + std::string(to_string(key.second)) + ".csv");
    auto out = open_output(path);
    write_density(curve, out);
    finish(out, path);
    files.push_back(path);
  }
}

}  // namespace

std::vector<fs::path> run(const RunConfig& config, std::ostream& log) {
  config.validate();
  std::error_code ec;
  fs::create_directories(config.out, ec);
  if (ec) throw Error(Errc::IoError, "cannot create '" + config.out.string() + "': " + ec.message());
  std::vector<fs::path> files;

  switch (config.command) {
    case Command::Synth: {
      const Dataset dataset = generate_synthetic(config.synth.value_or(SynthConfig{}));
      const auto path = config.out / "synth.csv";
      write_dataset(dataset, path);
      files.push_back(path);
      std::size_t observations = 0;
      for (const auto& s : dataset.series()) observations += s.size();
      log << "synth: " << dataset.size() << " series, " << observations << " observations -> " << path.string()
          << '\n';
      break;
    }
    case Command::Cluster: {
      const Dataset dataset = load_dataset(config);
      const auto groups = align_groups(dataset);
      log << "align: " << dataset.size() << " series in " << groups.size() << " aligned groups\n";
      std::vector<ClusterSummary> summaries;
      for (const auto& choice : cluster_choices(config, true)) {
        const auto clustering = cluster_dataset(groups, choice.params, config.workers);
        summaries.push_back(summarize(clustering, choice.params, choice.name));
        const auto path = config.out / ("cluster_labels_" + choice.name + ".csv");
        auto out = open_output(path);
        write_cluster_labels(clustering, out);
        finish(out, path);
        files.push_back(path);
        const auto& s = summaries.back();
        log << "cluster " << choice.name << ": " << s.n_series_clustered << " series clustered, " << s.n_clusters
            << " clusters, noise " << detail::format_double(s.noise_pct) << "%\n";
      }
      const auto path = config.out / "cluster_summary.csv";
      auto out = open_output(path);
      write_cluster_summary(summaries, out);
      finish(out, path);
      files.push_back(path);
      break;
    }
    case Command::Forecast: {
      const Dataset dataset = load_dataset(config);
      const auto choice = cluster_choices(config, false).front();
      const auto report = benchmark(dataset, benchmark_options(config, choice.params));
      std::map<std::string, const Series*> by_id;
      for (const auto& s : dataset.series()) by_id[s.id()] = &s;
      for (Method method : config.methods) {
        const auto path = config.out / ("forecasts_" + std::string(to_string(method)) + ".csv");
        auto out = open_output(path);
        out << "series_id,cluster_id,year,month,forecast,actual,status\n";
        std::size_t written = 0;
        for (const auto& row : report.rows) {
          if (row.method != method) continue;
          const std::string cid = row.cluster_id ? std::to_string(*row.cluster_id) : "";
          if (!row.metrics) {
            out << row.series_id << ',' << cid << ",,,,," << row.status << '\n';
            continue;
          }
          const auto split = train_test_split(*by_id.at(row.series_id));
          const auto& test = split.test.observations();
          for (std::size_t k = 0; k < test.size(); ++k) {
            out << row.series_id << ',' << cid << ',' << test[k].when.year << ',' << test[k].when.month << ','
                << detail::format_double(row.forecast[k]) << ',' << detail::format_double(test[k].value) << ",ok\n";
          }
          ++written;
        }
        finish(out, path);
        files.push_back(path);
        log << "forecast " << to_string(method) << ": " << written << " series forecast -> " << path.string()
            << '\n';
      }
      break;
    }
    case Command::Benchmark: {
      const Dataset dataset = load_dataset(config);
      const auto choice = cluster_choices(config, false).front();
      const auto report = benchmark(dataset, benchmark_options(config, choice.params));
      const auto path = config.out / ("report_" + choice.name + ".csv");
      auto out = open_output(path);
      write_report(report.rows, out);
      finish(out, path);
      files.push_back(path);
      write_densities(report.densities, config.out, "density_" + choice.name + "_", files);
      const auto summary_path = config.out / ("summary_" + choice.name + ".csv");
      auto summary = open_output(summary_path);
      write_method_summary(report.rows, summary);
      finish(summary, summary_path);
      files.push_back(summary_path);
      log << "benchmark " << choice.name << ": " << report.rows.size() << " rows, " << count_ok(report.rows)
          << " scored -> " << path.string() << '\n';
      break;
    }
    case Command::Report: {
      std::ifstream in(*config.input);
      if (!in) throw Error(Errc::IoError, "cannot open '" + config.input->string() + "'");
      const auto rows = read_report(in);
      write_densities(density_curves(rows), config.out, "report_density_", files);
      const auto path = config.out / "report_summary.csv";
      auto out = open_output(path);
      write_method_summary(rows, out);
      finish(out, path);
      files.push_back(path);
      log << "report: " << rows.size() << " rows, " << count_ok(rows) << " scored -> " << path.string() << '\n';
      break;
    }
  }
  return files;
}

namespace {

struct Flags {
  std::optional<std::string> config;
  std::optional<std::string> input;
  std::optional<std::string> synth;
  std::optional<int> n_series;
  std::vector<std::string> presets;
  std::optional<int> min_pts;
  std::optional<double> eps;
  std::optional<double> cos_threshold;
  std::optional<std::string> methods;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> workers;
  std::optional<int> epochs;
  std::optional<int> cluster_epochs;
  std::optional<int> hidden;
  std::optional<int> window;
  std::optional<double> learning_rate;
};

void add_flags(CLI::App& sub, Flags& f) {
  sub.add_option("--config", f.config, "JSON run configuration; flags override it");
  auto* input = sub.add_option("--input", f.input, "Observation CSV (report CSV for `report`)");
  auto* synth = sub.add_option("--synth", f.synth, "Synthetic dataset config (JSON), or 'default'");
  input->excludes(synth);
  sub.add_option("--n-series", f.n_series, "Override the synthetic series count");
  sub.add_option("--preset", f.presets, "Cluster preset D1..D4")->delimiter(',');
  sub.add_option("--min-pts", f.min_pts, "Explicit DBSCAN minPts");
  sub.add_option("--eps", f.eps, "Explicit euclidean threshold (m^3)");
  sub.add_option("--cos", f.cos_threshold, "Explicit cosine-similarity floor");
  sub.add_option("--methods", f.methods, "Comma list of baseline,sarima,lstm,gru,lstm_clustered,gru_clustered or all");
  sub.add_option("--seed", f.seed, "Global seed");
  sub.add_option("--out", f.out, "Output directory");
  sub.add_option("--workers", f.workers, "Worker threads (default: processor count)");
  sub.add_option("--epochs", f.epochs, "Per-series training epochs");
  sub.add_option("--cluster-epochs", f.cluster_epochs, "Per-cluster training epochs");
  sub.add_option("--hidden", f.hidden, "Recurrent hidden size");
  sub.add_option("--window", f.window, "Input window length");
  sub.add_option("--lr", f.learning_rate, "Adam learning rate");
}

RunConfig resolve(Command command, const Flags& f) {
  bool synth_seed = false;
  RunConfig c;
  c.command = command;
  if (f.config) c = load_config_impl(*f.config, command, synth_seed);

  if (f.input) {
    c.input = fs::path(*f.input);
    c.synth.reset();
  }
  if (f.synth) {
    c.input.reset();
    if (*f.synth == "default") {
      c.synth = SynthConfig{};
      synth_seed = false;
    } else {
      c.synth = SynthConfig{};
      try {
        synth_seed = apply_synth(read_json(*f.synth), *c.synth);
      } catch (const json::exception& e) {
        throw Error(Errc::ConfigError, *f.synth + ": " + e.what());
      }
    }
  }
  if (f.n_series) {
    if (!c.synth) c.synth = SynthConfig{};
    c.synth->n_series = *f.n_series;
  }
  if (!f.presets.empty()) {
    c.presets = f.presets;
    c.cluster_params.reset();
  }
  if (f.min_pts || f.eps || f.cos_threshold) {
    ClusterParams p = c.cluster_params.value_or(preset(c.presets.empty() ? "D1" : c.presets.front()));
    if (f.min_pts) p.min_pts = *f.min_pts;
    if (f.eps) p.eps = *f.eps;
    if (f.cos_threshold) p.cos_threshold = *f.cos_threshold;
    c.cluster_params = p;
    c.presets.clear();
  }
  if (f.methods) c.methods = parse_methods(*f.methods);
  if (f.seed) c.seed = *f.seed;
  if (f.out) c.out = fs::path(*f.out);
  if (f.workers) c.workers = *f.workers;
  if (f.epochs) c.train.epochs = *f.epochs;
  if (f.cluster_epochs) c.cluster_epochs = *f.cluster_epochs;
  if (f.hidden) c.train.hidden_size = *f.hidden;
  if (f.window) c.train.window = *f.window;
  if (f.learning_rate) c.train.learning_rate = *f.learning_rate;
  if (c.synth && (f.seed || !synth_seed)) c.synth->seed = c.seed;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quarterly water-consumption forecasting benchmark"};
  app.require_subcommand(1);
  Flags flags;
  const std::pair<const char*, const char*> commands[] = {
      {"synth", "Generate a synthetic dataset"},
      {"cluster", "Align series and run dual-threshold DBSCAN"},
      {"forecast", "Forecast the test suffix of every series"},
      {"benchmark", "Score every method and write reports and densities"},
      {"report", "Recompute densities and summaries from a report CSV"},
  };
  for (const auto& [name, help] : commands) add_flags(*app.add_subcommand(name, help), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    const auto* sub = app.get_subcommands().front();
    run(resolve(parse_command(sub->get_name()), flags), std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace hydrocast::cli
