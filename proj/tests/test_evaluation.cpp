#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "hydrocast/dataset.hpp"
#include "hydrocast/evaluation.hpp"

using namespace hydrocast;

namespace {

Series series_of(std::size_t n) {
  std::vector<Observation> obs;
  for (std::size_t k = 0; k < n; ++k) obs.push_back({Timestamp{2013, 1}.plus_months(3L * static_cast<long>(k)), 1.0 + k});
  return validate_series("s", "r", obs);
}

BenchmarkOptions quick_options() {
  BenchmarkOptions options;
  options.cluster_params = preset("D1");
  options.train.epochs = 5;
  options.cluster_epochs = 3;
  return options;
}

}  // namespace

TEST_CASE("train_test_split sizes") {
  auto check = [](std::size_t n, std::size_t train) {
    const auto split = train_test_split(series_of(n));
    CHECK(split.train.size() == train);
    CHECK(split.test.size() == n - train);
  };
  check(28, 22);
  check(10, 8);
  check(5, 4);
  CHECK_THROWS_AS(train_test_split(series_of(1)), Error);
  CHECK_THROWS_AS(train_test_split(series_of(5), 0.1), Error);
}

TEST_CASE("split parts reassemble the original") {
  for (std::size_t n = 2; n <= 40; ++n) {
    const auto s = series_of(n);
    for (double ratio : {0.5, 0.8, 0.9}) {
      const auto split = train_test_split(s, ratio);
      auto joined = split.train.observations();
      joined.insert(joined.end(), split.test.observations().begin(), split.test.observations().end());
      CHECK(joined == s.observations());
    }
  }
}

TEST_CASE("metric examples") {
  const std::vector<double> zero{0, 0};
  CHECK(metrics(std::vector<double>{1, -1}, zero) == MetricTriple{1, 1, 1});
  const auto m = metrics(std::vector<double>{3, 4}, zero);
  CHECK(m.mae == 3.5);
  CHECK(m.mse == 12.5);
  CHECK(m.rmse == doctest::Approx(3.5355339059327378).epsilon(1e-15));
  const std::vector<double> y{4.2, 1.1, 9};
  CHECK(metrics(y, y) == MetricTriple{0, 0, 0});
  CHECK_THROWS_AS(metrics(y, zero), Error);
  CHECK_THROWS_AS(metrics(std::vector<double>{}, std::vector<double>{}), Error);
}

TEST_CASE("metric invariants over random vectors") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> value(-100, 100);
  std::uniform_int_distribution<int> ints(-1000, 1000);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 1 + trial % 17;
    std::vector<double> f(n), a(n);
    for (std::size_t k = 0; k < n; ++k) {
      f[k] = value(rng);
      a[k] = value(rng);
    }
    const auto m = metrics(f, a);
    CHECK(std::abs(m.rmse - std::sqrt(m.mse)) <= 1e-12 * std::max(1.0, m.rmse));
    CHECK(m.rmse >= m.mae * (1 - 1e-15));

    // Integer data keeps the shifted errors exact.
    std::vector<double> fi(n), ai(n), fs(n), as(n);
    const double c = ints(rng);
    for (std::size_t k = 0; k < n; ++k) {
      fi[k] = ints(rng);
      ai[k] = ints(rng);
      fs[k] = fi[k] + c;
      as[k] = ai[k] + c;
    }
    CHECK(metrics(fs, as) == metrics(fi, ai));
  }
}

TEST_CASE("kde of standard normal samples") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> normal(0, 1);
  std::vector<double> v(1000);
  for (auto& x : v) x = normal(rng);
  const auto curve = kde(v);
  CHECK(curve.bandwidth > 0.0);
  CHECK(trapezoid_integral(curve) == doctest::Approx(1.0).epsilon(0.01));
  // Density at the grid point nearest 0.
  std::size_t nearest = 0;
  for (std::size_t k = 0; k < curve.grid.size(); ++k) {
    if (std::abs(curve.grid[k]) < std::abs(curve.grid[nearest])) nearest = k;
  }
  CHECK(std::abs(curve.density[nearest] - 0.399) < 0.05);
}

TEST_CASE("kde of constant data falls back to unit bandwidth") {
  const std::vector<double> v(10, 4.0);
  CHECK(silverman_bandwidth(v) == 1.0);
  const auto curve = kde(v);
  CHECK(curve.bandwidth == 1.0);
  const auto peak = std::max_element(curve.density.begin(), curve.density.end()) - curve.density.begin();
  CHECK(curve.grid[peak] == doctest::Approx(4.0).epsilon(0.02));
  CHECK(curve.grid.front() == doctest::Approx(1.0));
  CHECK(curve.grid.back() == doctest::Approx(7.0));
}

TEST_CASE("kde invariants on awkward inputs") {
  std::mt19937_64 rng(13);
  std::lognormal_distribution<double> heavy(0, 2);
  std::vector<std::vector<double>> cases{{1.0}, {0, 0, 0, 1e6}, {1, 2}, {-5, 5, 5, 5, 5}};
  std::vector<double> tail(500);
  for (auto& x : tail) x = heavy(rng);
  cases.push_back(tail);
  for (const auto& v : cases) {
    const auto curve = kde(v);
    CHECK(curve.bandwidth > 0.0);
    CHECK(trapezoid_integral(curve) == doctest::Approx(1.0).epsilon(0.01));
    CHECK(std::is_sorted(curve.grid.begin(), curve.grid.end()));
    CHECK(std::adjacent_find(curve.grid.begin(), curve.grid.end()) == curve.grid.end());
    for (double d : curve.density) CHECK(d >= 0.0);
  }
  CHECK_THROWS_AS(kde(std::vector<double>{}), Error);
}

TEST_CASE("method names") {
  for (Method m : kAllMethods) CHECK(parse_method(to_string(m)) == m);
  CHECK(parse_methods("all").size() == 6);
  CHECK(parse_methods("gru,baseline") == std::vector<Method>{Method::Baseline, Method::Gru});
  CHECK_THROWS_AS(parse_method("prophet"), Error);
  CHECK(is_clustered(Method::GruClustered));
  CHECK_FALSE(is_clustered(Method::Sarima));
}

TEST_CASE("baseline benchmark on three series") {
  SynthConfig config;
  config.n_series = 3;
  config.n_archetypes = 3;
  BenchmarkOptions options;
  options.methods = {Method::Baseline};
  const auto report = benchmark(generate_synthetic(config), options);
  REQUIRE(report.rows.size() == 3);
  for (const auto& row : report.rows) {
    CHECK(row.status == "ok");
    REQUIRE(row.metrics);
    CHECK(std::isfinite(row.metrics->mae));
    CHECK(row.forecast.size() == 6);
  }
}

TEST_CASE("benchmark is complete and deterministic") {
  SynthConfig config;
  config.n_series = 60;
  const auto ds = generate_synthetic(config);
  auto options = quick_options();
  const auto a = benchmark(ds, options);
  options.workers = 3;
  const auto b = benchmark(ds, options);
  CHECK(a.rows == b.rows);

  const auto groups = align_groups(ds);
  const auto clustering = cluster_dataset(groups, *options.cluster_params);
  const std::size_t clustered = ds.size() - clustering.n_noise();
  CHECK(a.rows.size() == 4 * ds.size() + 2 * clustered);
  for (std::size_t k = 1; k < a.rows.size(); ++k) {
    const auto& p = a.rows[k - 1];
    const auto& q = a.rows[k];
    CHECK(std::pair(p.method, p.series_id) < std::pair(q.method, q.series_id));
  }
  for (const auto& row : a.rows) {
    CHECK(row.metrics.has_value() == (row.status == "ok"));
    CHECK(row.cluster_id.has_value() == is_clustered(row.method));
    if (row.cluster_id) CHECK(*row.cluster_id == clustering.labels.at(row.series_id));
  }
}

TEST_CASE("failing cells become tagged rows") {
  // Seven points leave five for training, short of two baseline seasons.
  std::vector<Observation> obs;
  for (int k = 0; k < 7; ++k) obs.push_back({Timestamp{2013, 1}.plus_months(3L * k), 5.0 + k});
  const Dataset ds({validate_series("short", "r", obs)}, {});
  BenchmarkOptions options;
  options.methods = {Method::Baseline, Method::Lstm};
  options.train.epochs = 2;
  const auto report = benchmark(ds, options);
  REQUIRE(report.rows.size() == 2);
  CHECK(report.rows[0].status == "InsufficientHistory");
  CHECK_FALSE(report.rows[0].metrics);
  CHECK(report.rows[1].status == "ok");
}

TEST_CASE("clustered methods require cluster parameters") {
  SynthConfig config;
  config.n_series = 5;
  config.n_archetypes = 2;
  BenchmarkOptions options;
  options.methods = {Method::GruClustered};
  CHECK_THROWS_AS(benchmark(generate_synthetic(config), options), Error);
}

TEST_CASE("model seeds depend on the subject") {
  CHECK(model_seed(42, Method::Lstm, "S000001") == model_seed(42, Method::Lstm, "S000001"));
  CHECK(model_seed(42, Method::Lstm, "S000001") != model_seed(42, Method::Lstm, "S000002"));
  CHECK(model_seed(42, Method::Lstm, "S000001") != model_seed(42, Method::Gru, "S000001"));
  CHECK(model_seed(42, Method::Lstm, "S000001") != model_seed(43, Method::Lstm, "S000001"));
}

TEST_CASE("reports round-trip through csv") {
  SynthConfig config;
  config.n_series = 30;
  auto options = quick_options();
  options.methods = {Method::Baseline, Method::Sarima, Method::GruClustered};
  auto report = benchmark(generate_synthetic(config), options);
  std::stringstream buf;
  write_report(report.rows, buf);
  const auto back = read_report(buf);
  for (auto& row : report.rows) row.forecast.clear();
  CHECK(back == report.rows);

  std::stringstream summary;
  write_method_summary(report.rows, summary);
  CHECK(summary.str().find("baseline") != std::string::npos);
}

TEST_CASE("density curves and medians") {
  std::vector<ReportRow> rows;
  for (int k = 0; k < 5; ++k) {
    ReportRow row;
    row.series_id = "s" + std::to_string(k);
    row.method = Method::Gru;
    const double e = 1.0 + k;
    row.metrics = MetricTriple{e, e * e, e};
    rows.push_back(row);
  }
  ReportRow failed;
  failed.series_id = "bad";
  failed.method = Method::Gru;
  failed.status = "DivergedLoss";
  rows.push_back(failed);
  CHECK(median_metric(rows, Method::Gru, Metric::Mae) == 3.0);
  CHECK(median_metric(rows, Method::Gru, Metric::Mse) == 9.0);
  CHECK_FALSE(median_metric(rows, Method::Lstm, Metric::Mae));
  const auto curves = density_curves(rows);
  CHECK(curves.size() == 3);
  CHECK(curves.contains({Method::Gru, Metric::Rmse}));
}
