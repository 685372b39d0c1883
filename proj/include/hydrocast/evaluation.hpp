#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hydrocast/clustering.hpp"
#include "hydrocast/core.hpp"
#include "hydrocast/dataset.hpp"
#include "hydrocast/neural.hpp"
#include "hydrocast/parallel.hpp"

namespace hydrocast {

struct SplitSeries {
  Series train;
  Series test;
};

/// Chronological split with floor(ratio * n) training points. Throws TooShort
/// unless both parts are non-empty.
SplitSeries train_test_split(const Series& series, double ratio = 0.8);

struct MetricTriple {
  double mae = 0.0;
  double mse = 0.0;
  double rmse = 0.0;

  friend bool operator==(const MetricTriple&, const MetricTriple&) = default;
};

/// Throws LengthMismatch, EmptyInput.
MetricTriple metrics(std::span<const double> forecast, std::span<const double> actual);

enum class Metric { Mae, Mse, Rmse };
inline constexpr Metric kAllMetrics[] = {Metric::Mae, Metric::Mse, Metric::Rmse};
std::string_view to_string(Metric metric) noexcept;
double value_of(const MetricTriple& triple, Metric metric) noexcept;

struct DensityCurve {
  std::vector<double> grid;
  std::vector<double> density;
  double bandwidth = 1.0;
};

/// 0.9 * min(sd, IQR / 1.34) * n^(-1/5), or 1.0 when that is zero.
double silverman_bandwidth(std::span<const double> values);

/// Gaussian KDE over [min - 3h, max + 3h]. `grid_size` is a floor: the grid is
/// refined when needed so that its spacing stays below h / 3.
DensityCurve kde(std::span<const double> values, std::size_t grid_size = 256);

double trapezoid_integral(const DensityCurve& curve);

enum class Method { Baseline, Sarima, Lstm, Gru, LstmClustered, GruClustered };
inline constexpr Method kAllMethods[] = {Method::Baseline,      Method::Sarima, Method::Lstm,
                                         Method::Gru,           Method::LstmClustered, Method::GruClustered};

std::string_view to_string(Method method) noexcept;
/// Throws ConfigError.
Method parse_method(std::string_view name);
/// Comma-separated list, or "all".
std::vector<Method> parse_methods(std::string_view list);
bool is_clustered(Method method) noexcept;
CellKind cell_kind(Method method);

struct BenchmarkOptions {
  std::vector<Method> methods{std::begin(kAllMethods), std::end(kAllMethods)};
  std::optional<ClusterParams> cluster_params;
  TrainConfig train;         // per-series neural models
  int cluster_epochs = 200;  // per-cluster neural models
  double train_ratio = 0.8;
  std::uint64_t seed = 42;
  unsigned workers = 1;
};

struct ReportRow {
  std::string series_id;
  Method method = Method::Baseline;
  std::optional<int> cluster_id;
  std::optional<MetricTriple> metrics;
  std::string status = "ok";
  std::vector<double> forecast;  // test-period forecasts; not part of the CSV

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct EvalReport {
  std::vector<ReportRow> rows;  // sorted by (method, series_id)
  std::map<std::pair<Method, Metric>, DensityCurve> densities;
};

/// Seed for one model: a pure function of the run seed and the model's
/// subject (a series id or a cluster id).
std::uint64_t model_seed(std::uint64_t run_seed, Method method, std::string_view subject);

/// Forecast `horizon` steps after `train` with one of the per-series methods.
/// Neural methods are trained with `config` using its seed as given.
std::vector<double> forecast_series(Method method, std::span<const double> train, std::size_t horizon,
                                    const TrainConfig& config);

/// Every (series, method) cell of the comparison. Series that clustering
/// marks as noise have no clustered-method rows; a failing cell becomes a row
/// tagged with its error instead of aborting the run.
EvalReport benchmark(const Dataset& dataset, const BenchmarkOptions& options);

/// KDE per (method, metric) over the successful rows.
std::map<std::pair<Method, Metric>, DensityCurve> density_curves(const std::vector<ReportRow>& rows);

/// Median of one metric over a method's successful rows; nullopt when none.
std::optional<double> median_metric(const std::vector<ReportRow>& rows, Method method, Metric metric);

inline constexpr const char* kReportHeader = "series_id,method,cluster_id,mae,mse,rmse,status";
inline constexpr const char* kDensityHeader = "x,density";

void write_report(const std::vector<ReportRow>& rows, std::ostream& out);
/// Throws MalformedRow.
std::vector<ReportRow> read_report(std::istream& in);
void write_density(const DensityCurve& curve, std::ostream& out);
/// Per method: row counts and mean/median of each metric.
void write_method_summary(const std::vector<ReportRow>& rows, std::ostream& out);

}  // namespace hydrocast
