#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>
#include <string>
#include <vector>

#include "hydrocast/classical.hpp"
#include "hydrocast/cli.hpp"
#include "hydrocast/clustering.hpp"
#include "hydrocast/dataset.hpp"
#include "hydrocast/evaluation.hpp"
#include "hydrocast/neural.hpp"

namespace py = pybind11;
using namespace hydrocast;

namespace {

using Values = std::vector<double>;

std::vector<std::pair<int, int>> timestamps(const Series& s) {
  std::vector<std::pair<int, int>> out;
  out.reserve(s.size());
  for (const auto& o : s.observations()) out.emplace_back(o.when.year, o.when.month);
  return out;
}

Series make_series(std::string id, std::string region, const std::vector<std::pair<int, int>>& when,
                   const Values& values) {
  if (when.size() != values.size()) throw Error(Errc::LengthMismatch, "timestamps and values differ in length");
  std::vector<Observation> obs;
  obs.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    obs.push_back({make_timestamp(when[i].first, when[i].second), values[i]});
  }
  return validate_series(std::move(id), std::move(region), std::move(obs));
}

py::dict metrics_dict(const MetricTriple& m) {
  py::dict d;
  d["mae"] = m.mae;
  d["mse"] = m.mse;
  d["rmse"] = m.rmse;
  return d;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<std::string> storage{"hydrocast"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : storage) argv.push_back(a.data());
  py::gil_scoped_release release;
  return cli::main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

PYBIND11_MODULE(_hydrocast, m) {
  m.doc() = "Quarterly water-consumption forecasting and series clustering";

  // Messages start with the error kind, e.g. "InsufficientHistory: ...".
  py::register_exception<Error>(m, "HydrocastError", PyExc_ValueError);

  py::class_<Series>(m, "Series")
      .def(py::init(&make_series), py::arg("id"), py::arg("region_id"), py::arg("timestamps"), py::arg("values"))
      .def_property_readonly("id", &Series::id)
      .def_property_readonly("region_id", &Series::region_id)
      .def_property_readonly("values", &Series::values)
      .def_property_readonly("timestamps", &timestamps)
      .def("__len__", &Series::size)
      .def("__repr__", [](const Series& s) { return "<Series " + s.id() + " (" + std::to_string(s.size()) + ")>"; });

  py::class_<Dataset>(m, "Dataset")
      .def(py::init([](std::vector<Series> series) { return Dataset(std::move(series), Provenance{}); }),
           py::arg("series"))
      .def_property_readonly("series", &Dataset::series)
      .def_property_readonly("seed", [](const Dataset& d) { return d.provenance().seed; })
      .def("__len__", &Dataset::size)
      .def_static("from_csv", py::overload_cast<const std::filesystem::path&>(&parse_dataset), py::arg("path"))
      .def_static("from_csv_text",
                  [](const std::string& text) {
                    std::istringstream in(text);
                    return parse_dataset(in);
                  })
      .def("to_csv", py::overload_cast<const Dataset&, const std::filesystem::path&>(&write_dataset), py::arg("path"))
      .def("to_csv_text", [](const Dataset& d) {
        std::ostringstream out;
        write_dataset(d, out);
        return out.str();
      });

  py::class_<Range>(m, "Range")
      .def(py::init([](double low, double high) { return Range{low, high}; }))
      .def_readwrite("low", &Range::low)
      .def_readwrite("high", &Range::high);

  py::class_<SynthConfig>(m, "SynthConfig")
      .def(py::init<>())
      .def_readwrite("n_series", &SynthConfig::n_series)
      .def_readwrite("n_regions", &SynthConfig::n_regions)
      .def_readwrite("first_year", &SynthConfig::first_year)
      .def_readwrite("last_year", &SynthConfig::last_year)
      .def_readwrite("n_month_patterns", &SynthConfig::n_month_patterns)
      .def_readwrite("base_level", &SynthConfig::base_level)
      .def_readwrite("seasonal_amplitude", &SynthConfig::seasonal_amplitude)
      .def_readwrite("trend_slope", &SynthConfig::trend_slope)
      .def_readwrite("noise_sd", &SynthConfig::noise_sd)
      .def_readwrite("noise_spread", &SynthConfig::noise_spread)
      .def_readwrite("n_archetypes", &SynthConfig::n_archetypes)
      .def_readwrite("max_aggregation", &SynthConfig::max_aggregation)
      .def_readwrite("seed", &SynthConfig::seed);

  m.def("generate_synthetic", &generate_synthetic, py::arg("config"));

  py::class_<AlignedGroup>(m, "AlignedGroup")
      .def_readonly("region_id", &AlignedGroup::region_id)
      .def_property_readonly("months", [](const AlignedGroup& g) { return g.pattern.months; })
      .def_readonly("members", &AlignedGroup::members);
  m.def("align_groups", &align_groups, py::arg("dataset"));

  m.def(
      "cosine_similarity", [](const Values& u, const Values& v) { return cosine_similarity(u, v); }, py::arg("u"),
      py::arg("v"));
  m.def(
      "euclidean_distance", [](const Values& u, const Values& v) { return euclidean_distance(u, v); }, py::arg("u"),
      py::arg("v"));

  py::class_<ClusterParams>(m, "ClusterParams")
      .def(py::init([](int min_pts, double eps, double cos_threshold) {
             ClusterParams p{min_pts, eps, cos_threshold};
             p.validate();
             return p;
           }),
           py::arg("min_pts") = 10, py::arg("eps") = 10.0, py::arg("cos_threshold") = 0.8)
      .def_readonly("min_pts", &ClusterParams::min_pts)
      .def_readonly("eps", &ClusterParams::eps)
      .def_readonly("cos_threshold", &ClusterParams::cos_threshold)
      .def("__eq__", [](const ClusterParams& a, const ClusterParams& b) { return a == b; });
  m.def("preset", [](const std::string& name) { return preset(name); }, py::arg("name"));

  py::class_<Clustering>(m, "Clustering")
      .def_readonly("labels", &Clustering::labels)
      .def_readonly("core", &Clustering::core)
      .def_readonly("n_clusters", &Clustering::n_clusters)
      .def_readonly("noise_fraction", &Clustering::noise_fraction);
  m.def(
      "cluster",
      [](const Dataset& d, const ClusterParams& p, unsigned workers) {
        const auto groups = align_groups(d);
        py::gil_scoped_release release;
        return cluster_dataset(groups, p, workers);
      },
      py::arg("dataset"), py::arg("params"), py::arg("workers") = 1);
  m.def(
      "dbscan_vectors",
      [](const std::vector<Values>& vectors, const ClusterParams& p) { return dbscan_vectors(vectors, p).labels; },
      py::arg("vectors"), py::arg("params"), "Cluster labels per vector, -1 for noise.");

  m.def(
      "baseline_forecast",
      [](const Values& history, std::size_t horizon, int season) {
        return baseline_forecast(history, SeasonPeriod(season), horizon);
      },
      py::arg("history"), py::arg("horizon"), py::arg("season") = 4);

  py::class_<SarimaOrder>(m, "SarimaOrder")
      .def(py::init([](int p, int d, int q, int P, int D, int Q, int s) {
             SarimaOrder o{p, d, q, P, D, Q, SeasonPeriod(s)};
             o.validate();
             return o;
           }),
           py::arg("p") = 0, py::arg("d") = 0, py::arg("q") = 0, py::arg("P") = 0, py::arg("D") = 0, py::arg("Q") = 0,
           py::arg("s") = 4)
      .def_readonly("p", &SarimaOrder::p)
      .def_readonly("d", &SarimaOrder::d)
      .def_readonly("q", &SarimaOrder::q)
      .def_readonly("P", &SarimaOrder::P)
      .def_readonly("D", &SarimaOrder::D)
      .def_readonly("Q", &SarimaOrder::Q)
      .def("__eq__", [](const SarimaOrder& a, const SarimaOrder& b) { return a == b; })
      .def("__repr__", &SarimaOrder::to_string);
  m.def("default_order_grid", [] { return default_order_grid(); });

  py::class_<SarimaModel>(m, "SarimaModel")
      .def_readonly("order", &SarimaModel::order)
      .def_readonly("ar", &SarimaModel::ar)
      .def_readonly("ma", &SarimaModel::ma)
      .def_readonly("sar", &SarimaModel::sar)
      .def_readonly("sma", &SarimaModel::sma)
      .def_readonly("intercept", &SarimaModel::intercept)
      .def_readonly("sigma2", &SarimaModel::sigma2)
      .def_readonly("aic", &SarimaModel::aic)
      .def("to_json", [](const SarimaModel& model) { return to_json(model); });
  m.def(
      "fit_sarima", [](const Values& v, const SarimaOrder& o) { return fit_sarima(v, o); }, py::arg("values"),
      py::arg("order"));
  m.def(
      "select_sarima",
      [](const Values& v, unsigned workers) {
        const auto grid = default_order_grid();
        py::gil_scoped_release release;
        return select_model(v, grid, workers);
      },
      py::arg("values"), py::arg("workers") = 1, "Best model over the default order grid by AIC.");
  m.def(
      "sarima_forecast",
      [](const SarimaModel& model, const Values& v, std::size_t horizon) { return sarima_forecast(model, v, horizon); },
      py::arg("model"), py::arg("values"), py::arg("horizon"));

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("beta1", &TrainConfig::beta1)
      .def_readwrite("beta2", &TrainConfig::beta2)
      .def_readwrite("adam_epsilon", &TrainConfig::adam_epsilon)
      .def_readwrite("hidden_size", &TrainConfig::hidden_size)
      .def_readwrite("window", &TrainConfig::window)
      .def_readwrite("clip_norm", &TrainConfig::clip_norm)
      .def_readwrite("seed", &TrainConfig::seed);

  py::class_<RecurrentModel>(m, "RecurrentModel")
      .def_property_readonly("kind", [](const RecurrentModel& r) { return std::string(to_string(r.kind)); })
      .def_readonly("hidden_size", &RecurrentModel::hidden_size)
      .def_readonly("window", &RecurrentModel::window)
      .def_readonly("weights", &RecurrentModel::weights)
      .def_readonly("train_log", &RecurrentModel::train_log)
      .def(
          "predict",
          [](const RecurrentModel& r, const Values& history, std::size_t horizon) {
            return predict(r, history, horizon);
          },
          py::arg("history"), py::arg("horizon"))
      .def("to_json", [](const RecurrentModel& r) { return to_json(r); })
      .def_static("from_json", &recurrent_model_from_json, py::arg("text"))
      .def("__eq__", [](const RecurrentModel& a, const RecurrentModel& b) { return a == b; });
  m.def(
      "train",
      [](const std::vector<Values>& series, const std::string& kind, const TrainConfig& config) {
        const CellKind cell = parse_cell_kind(kind);
        py::gil_scoped_release release;
        return train(series, cell, config);
      },
      py::arg("series"), py::arg("kind"), py::arg("config"),
      "Train one model on the pooled windows of every series; kind is 'lstm' or 'gru'.");
  m.def(
      "param_count",
      [](const std::string& kind, int input_size, int hidden_size) {
        return param_count(parse_cell_kind(kind), input_size, hidden_size);
      },
      py::arg("kind"), py::arg("input_size"), py::arg("hidden_size"));

  m.def(
      "metrics", [](const Values& f, const Values& a) { return metrics_dict(metrics(f, a)); }, py::arg("forecast"),
      py::arg("actual"));
  m.def(
      "kde",
      [](const Values& v, std::size_t grid_size) {
        const auto c = kde(v, grid_size);
        return py::make_tuple(c.grid, c.density, c.bandwidth);
      },
      py::arg("values"), py::arg("grid_size") = 256, "Returns (grid, density, bandwidth).");

  py::class_<ReportRow>(m, "ReportRow")
      .def_readonly("series_id", &ReportRow::series_id)
      .def_property_readonly("method", [](const ReportRow& r) { return std::string(to_string(r.method)); })
      .def_readonly("cluster_id", &ReportRow::cluster_id)
      .def_property_readonly("metrics",
                             [](const ReportRow& r) -> py::object {
                               if (!r.metrics) return py::none();
                               return metrics_dict(*r.metrics);
                             })
      .def_readonly("status", &ReportRow::status)
      .def_readonly("forecast", &ReportRow::forecast);
  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("rows", &EvalReport::rows)
      .def(
          "median",
          [](const EvalReport& r, const std::string& method, const std::string& metric) {
            for (Metric k : kAllMetrics) {
              if (to_string(k) == metric) return median_metric(r.rows, parse_method(method), k);
            }
            throw Error(Errc::ConfigError, "unknown metric '" + metric + "'");
          },
          py::arg("method"), py::arg("metric") = "mae")
      .def("to_csv_text", [](const EvalReport& r) {
        std::ostringstream out;
        write_report(r.rows, out);
        return out.str();
      });
  m.def(
      "benchmark",
      [](const Dataset& d, const std::string& methods, std::optional<ClusterParams> params,
         std::optional<TrainConfig> train_config, std::optional<int> cluster_epochs, std::uint64_t seed,
         unsigned workers) {
        BenchmarkOptions o;
        o.methods = parse_methods(methods);
        o.cluster_params = params;
        if (train_config) o.train = *train_config;
        if (cluster_epochs) o.cluster_epochs = *cluster_epochs;
        o.seed = seed;
        o.workers = workers;
        py::gil_scoped_release release;
        return benchmark(d, o);
      },
      py::arg("dataset"), py::arg("methods") = "all", py::arg("cluster_params") = py::none(),
      py::arg("train") = py::none(), py::arg("cluster_epochs") = py::none(), py::arg("seed") = 42,
      py::arg("workers") = 1);

  m.def("run_cli", &run_cli, py::arg("args"), "Run the command-line tool in-process; returns its exit status.");
}
