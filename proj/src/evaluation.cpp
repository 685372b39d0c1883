#include "hydrocast/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>

#include "format.hpp"
#include "hydrocast/classical.hpp"
#include "hydrocast/seeding.hpp"

namespace hydrocast {

SplitSeries train_test_split(const Series& series, double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error(Errc::InvalidConfig, "split ratio must be in (0, 1)");
  const std::size_t n = series.size();
  // The epsilon keeps products such as 0.29 * 100 from flooring one short.
  const auto n_train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 1e-9));
  if (n < 2 || n_train < 1 || n_train >= n) {
    throw Error(Errc::TooShort, "series '" + series.id() + "' of length " + std::to_string(n) +
                                    " cannot be split at ratio " + detail::format_double(ratio));
  }
  return {series.slice(0, n_train), series.slice(n_train, n - n_train)};
}

MetricTriple metrics(std::span<const double> forecast, std::span<const double> actual) {
  if (forecast.size() != actual.size()) {
    throw Error(Errc::LengthMismatch, std::to_string(forecast.size()) + " forecasts for " +
                                          std::to_string(actual.size()) + " actuals");
  }
  if (forecast.empty()) throw Error(Errc::EmptyInput, "no forecasts to score");
  double abs_sum = 0.0;
  double sq_sum = 0.0;
  for (std::size_t i = 0; i < forecast.size(); ++i) {
    const double e = forecast[i] - actual[i];
    abs_sum += std::abs(e);
    sq_sum += e * e;
  }
  const auto n = static_cast<double>(forecast.size());
  MetricTriple out;
  out.mae = abs_sum / n;
  out.mse = sq_sum / n;
  out.rmse = std::sqrt(out.mse);
  return out;
}

std::string_view to_string(Metric metric) noexcept {
  switch (metric) {
    case Metric::Mae: return "mae";
    case Metric::Mse: return "mse";
    case Metric::Rmse: return "rmse";
  }
  return "?";
}

double value_of(const MetricTriple& triple, Metric metric) noexcept {
  switch (metric) {
    case Metric::Mae: return triple.mae;
    case Metric::Mse: return triple.mse;
    case Metric::Rmse: return triple.rmse;
  }
  return 0.0;
}

namespace {

double quantile_sorted(std::span<const double> sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

constexpr std::size_t kMaxGridPoints = std::size_t{1} << 20;
constexpr double kKernelReach = 8.0;  // bandwidths; the Gaussian tail beyond is below 1e-14

}  // namespace

double silverman_bandwidth(std::span<const double> values) {
  if (values.empty()) throw Error(Errc::EmptyInput, "bandwidth of an empty sample");
  const auto n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  const double h = 0.9 * std::min(sd, iqr / 1.34) * std::pow(n, -0.2);
  return (h > 0.0 && std::isfinite(h)) ? h : 1.0;
}

DensityCurve kde(std::span<const double> values, std::size_t grid_size) {
  if (values.empty()) throw Error(Errc::EmptyInput, "density of an empty sample");
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(Errc::NonFiniteValue, "density of a non-finite sample");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());

  DensityCurve curve;
  curve.bandwidth = silverman_bandwidth(values);
  const double h = curve.bandwidth;
  const double lo = sorted.front() - 3.0 * h;
  const double hi = sorted.back() + 3.0 * h;
  const double needed = std::ceil((hi - lo) / (h / 3.0)) + 1.0;
  const auto refined = static_cast<std::size_t>(std::min(needed, static_cast<double>(kMaxGridPoints)));
  const std::size_t points = std::max({grid_size, std::size_t{2}, refined});

  curve.grid.resize(points);
  curve.density.resize(points);
  const double step = (hi - lo) / static_cast<double>(points - 1);
  const double norm = 1.0 / (static_cast<double>(sorted.size()) * h * std::sqrt(2.0 * std::numbers::pi));
  std::size_t first = 0;
  for (std::size_t k = 0; k < points; ++k) {
    const double x = k + 1 == points ? hi : lo + step * static_cast<double>(k);
    curve.grid[k] = x;
    while (first < sorted.size() && sorted[first] < x - kKernelReach * h) ++first;
    double sum = 0.0;
    for (std::size_t i = first; i < sorted.size() && sorted[i] <= x + kKernelReach * h; ++i) {
      const double u = (x - sorted[i]) / h;
      sum += std::exp(-0.5 * u * u);
    }
    curve.density[k] = norm * sum;
  }
  return curve;
}

double trapezoid_integral(const DensityCurve& curve) {
  double area = 0.0;
  for (std::size_t k = 1; k < curve.grid.size(); ++k) {
    area += 0.5 * (curve.density[k] + curve.density[k - 1]) * (curve.grid[k] - curve.grid[k - 1]);
  }
  return area;
}

std::string_view to_string(Method method) noexcept {
  switch (method) {
    case Method::Baseline: return "baseline";
    case Method::Sarima: return "sarima";
    case Method::Lstm: return "lstm";
    case Method::Gru: return "gru";
    case Method::LstmClustered: return "lstm_clustered";
    case Method::GruClustered: return "gru_clustered";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (Method m : kAllMethods) {
    if (to_string(m) == name) return m;
  }
  throw Error(Errc::ConfigError, "unknown method '" + std::string(name) + "'");
}

std::vector<Method> parse_methods(std::string_view list) {
  if (list == "all") return {std::begin(kAllMethods), std::end(kAllMethods)};
  std::vector<Method> out;
  for (auto field : detail::split_csv(list)) {
    if (field.empty()) continue;
    const Method m = parse_method(field);
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  }
  if (out.empty()) throw Error(Errc::ConfigError, "empty method list");
  std::sort(out.begin(), out.end());
  return out;
}

bool is_clustered(Method method) noexcept {
  return method == Method::LstmClustered || method == Method::GruClustered;
}

CellKind cell_kind(Method method) {
  switch (method) {
    case Method::Lstm:
    case Method::LstmClustered: return CellKind::Lstm;
    case Method::Gru:
    case Method::GruClustered: return CellKind::Gru;
    default: throw Error(Errc::ConfigError, std::string(to_string(method)) + " is not a neural method");
  }
}

std::uint64_t model_seed(std::uint64_t run_seed, Method method, std::string_view subject) {
  return derive_seed(run_seed, std::string(to_string(method)) + ":" + std::string(subject));
}

std::vector<double> forecast_series(Method method, std::span<const double> train, std::size_t horizon,
                                    const TrainConfig& config) {
  switch (method) {
    case Method::Baseline: return baseline_forecast(train, kQuarterly, horizon);
    case Method::Sarima: {
      const auto grid = default_order_grid();
      return sarima_forecast(select_model(train, grid), train, horizon);
    }
    case Method::Lstm:
    case Method::Gru: {
      const std::vector<std::vector<double>> set{{train.begin(), train.end()}};
      return predict(hydrocast::train(set, cell_kind(method), config), train, horizon);
    }
    default: throw Error(Errc::ConfigError, std::string(to_string(method)) + " needs a cluster model");
  }
}

namespace {

std::string status_of(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) return std::string(to_string(err->code()));
  return "InternalError";
}

struct Cell {
  std::vector<ReportRow> rows;
};

}  // namespace

EvalReport benchmark(const Dataset& dataset, const BenchmarkOptions& options) {
  if (dataset.size() == 0) throw Error(Errc::EmptyInput, "benchmark of an empty dataset");
  if (options.methods.empty()) throw Error(Errc::ConfigError, "no methods selected");
  options.train.validate();
  const bool any_clustered = std::any_of(options.methods.begin(), options.methods.end(), is_clustered);
  if (any_clustered && !options.cluster_params) {
    throw Error(Errc::ConfigError, "clustered methods require cluster parameters");
  }

  const auto& series = dataset.series();
  std::vector<std::optional<SplitSeries>> splits(series.size());
  std::vector<std::string> split_status(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    try {
      splits[i] = train_test_split(series[i], options.train_ratio);
    } catch (const Error& e) {
      split_status[i] = std::string(to_string(e.code()));
    }
  }

  // Cluster membership, in series-id order within each cluster.
  std::map<std::string, std::size_t> index_by_id;
  for (std::size_t i = 0; i < series.size(); ++i) index_by_id[series[i].id()] = i;
  std::map<int, std::vector<std::size_t>> clusters;
  if (any_clustered) {
    const auto clustering = cluster_dataset(align_groups(dataset), *options.cluster_params, options.workers);
    for (const auto& [id, label] : clustering.labels) {
      if (label != kNoise) clusters[label].push_back(index_by_id.at(id));
    }
  }

  struct Task {
    Method method;
    std::size_t series_index = 0;  // per-series tasks
    int cluster_id = kNoise;       // clustered tasks
  };
  std::vector<Task> tasks;
  for (Method m : options.methods) {
    if (is_clustered(m)) {
      for (const auto& [cid, members] : clusters) tasks.push_back({m, 0, cid});
    } else {
      for (std::size_t i = 0; i < series.size(); ++i) tasks.push_back({m, i, kNoise});
    }
  }

  auto score = [&](ReportRow& row, std::size_t i, const std::vector<double>& forecast) {
    const auto actual = splits[i]->test.values();
    row.metrics = metrics(forecast, actual);
    row.forecast = forecast;
  };

  std::vector<Cell> cells(tasks.size());
  parallel_for(tasks.size(), options.workers, [&](std::size_t t) {
    const Task& task = tasks[t];
    auto& out = cells[t].rows;
    if (!is_clustered(task.method)) {
      const std::size_t i = task.series_index;
      ReportRow row{series[i].id(), task.method, std::nullopt, std::nullopt, "ok", {}};
      if (!splits[i]) {
        row.status = split_status[i];
      } else {
        try {
          TrainConfig config = options.train;
          config.seed = model_seed(options.seed, task.method, series[i].id());
          const auto train = splits[i]->train.values();
          score(row, i, forecast_series(task.method, train, splits[i]->test.size(), config));
        } catch (const std::exception& e) {
          row.metrics.reset();
          row.status = status_of(e);
        }
      }
      out.push_back(std::move(row));
      return;
    }

    const auto& members = clusters.at(task.cluster_id);
    std::vector<std::vector<double>> training;
    for (std::size_t i : members) {
      if (splits[i]) training.push_back(splits[i]->train.values());
    }
    std::optional<RecurrentModel> model;
    std::string model_status = "ok";
    try {
      if (training.empty()) throw Error(Errc::TooShort, "no member of the cluster can be split");
      TrainConfig config = options.train;
      config.epochs = options.cluster_epochs;
      config.seed = model_seed(options.seed, task.method, std::to_string(task.cluster_id));
      model = train(training, cell_kind(task.method), config);
    } catch (const std::exception& e) {
      model_status = status_of(e);
    }
    for (std::size_t i : members) {
      ReportRow row{series[i].id(), task.method, task.cluster_id, std::nullopt, "ok", {}};
      if (!splits[i]) {
        row.status = split_status[i];
      } else if (!model) {
        row.status = model_status;
      } else {
        try {
          score(row, i, predict(*model, splits[i]->train.values(), splits[i]->test.size()));
        } catch (const std::exception& e) {
          row.metrics.reset();
          row.status = status_of(e);
        }
      }
      out.push_back(std::move(row));
    }
  });

  EvalReport report;
  for (auto& cell : cells) {
    for (auto& row : cell.rows) report.rows.push_back(std::move(row));
  }
  std::sort(report.rows.begin(), report.rows.end(), [](const ReportRow& a, const ReportRow& b) {
    return std::tie(a.method, a.series_id) < std::tie(b.method, b.series_id);
  });
  report.densities = density_curves(report.rows);
  return report;
}

std::map<std::pair<Method, Metric>, DensityCurve> density_curves(const std::vector<ReportRow>& rows) {
  std::map<std::pair<Method, Metric>, std::vector<double>> samples;
  for (const auto& row : rows) {
    if (!row.metrics) continue;
    for (Metric metric : kAllMetrics) samples[{row.method, metric}].push_back(value_of(*row.metrics, metric));
  }
  std::map<std::pair<Method, Metric>, DensityCurve> out;
  for (const auto& [key, values] : samples) out.emplace(key, kde(values));
  return out;
}

std::optional<double> median_metric(const std::vector<ReportRow>& rows, Method method, Metric metric) {
  std::vector<double> values;
  for (const auto& row : rows) {
    if (row.method == method && row.metrics) values.push_back(value_of(*row.metrics, metric));
  }
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

void write_report(const std::vector<ReportRow>& rows, std::ostream& out) {
  out << kReportHeader << '\n';
  for (const auto& row : rows) {
    out << row.series_id << ',' << to_string(row.method) << ',';
    if (row.cluster_id) out << *row.cluster_id;
    out << ',';
    if (row.metrics) {
      out << detail::format_double(row.metrics->mae) << ',' << detail::format_double(row.metrics->mse) << ','
          << detail::format_double(row.metrics->rmse);
    } else {
      out << ",,";
    }
    out << ',' << row.status << '\n';
  }
}

std::vector<ReportRow> read_report(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind(kReportHeader, 0) != 0) {
    throw Error(Errc::MalformedRow, std::string("report lacks header '") + kReportHeader + "'");
  }
  std::vector<ReportRow> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = detail::split_csv(line);
    if (f.size() != 7 || f[0].empty()) throw Error(Errc::MalformedRow, "bad report row '" + line + "'");
    ReportRow row;
    row.series_id = std::string(f[0]);
    try {
      row.method = parse_method(f[1]);
    } catch (const Error&) {
      throw Error(Errc::MalformedRow, "bad method in report row '" + line + "'");
    }
    if (!f[2].empty()) {
      int cid = 0;
      if (!detail::parse_number(f[2], cid)) throw Error(Errc::MalformedRow, "bad cluster id in '" + line + "'");
      row.cluster_id = cid;
    }
    if (!f[3].empty()) {
      MetricTriple m;
      if (!detail::parse_number(f[3], m.mae) || !detail::parse_number(f[4], m.mse) ||
          !detail::parse_number(f[5], m.rmse)) {
        throw Error(Errc::MalformedRow, "bad metric in '" + line + "'");
      }
      row.metrics = m;
    }
    row.status = std::string(f[6]);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_density(const DensityCurve& curve, std::ostream& out) {
  out << kDensityHeader << '\n';
  for (std::size_t k = 0; k < curve.grid.size(); ++k) {
    out << detail::format_double(curve.grid[k]) << ',' << detail::format_double(curve.density[k]) << '\n';
  }
}

void write_method_summary(const std::vector<ReportRow>& rows, std::ostream& out) {
  out << "method,n_ok,n_failed,mean_mae,median_mae,mean_mse,median_mse,mean_rmse,median_rmse\n";
  for (Method method : kAllMethods) {
    std::size_t ok = 0;
    std::size_t failed = 0;
    MetricTriple sum;
    for (const auto& row : rows) {
      if (row.method != method) continue;
      if (!row.metrics) {
        ++failed;
        continue;
      }
      ++ok;
      sum.mae += row.metrics->mae;
      sum.mse += row.metrics->mse;
      sum.rmse += row.metrics->rmse;
    }
    if (ok + failed == 0) continue;
    out << to_string(method) << ',' << ok << ',' << failed;
    for (Metric metric : kAllMetrics) {
      const auto median = median_metric(rows, method, metric);
      out << ',' << (ok ? detail::format_double(value_of(sum, metric) / static_cast<double>(ok)) : "") << ','
          << (median ? detail::format_double(*median) : "");
    }
    out << '\n';
  }
}

}  // namespace hydrocast
