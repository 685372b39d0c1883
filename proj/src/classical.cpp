#include "hydrocast/classical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <tuple>

#include <nlohmann/json.hpp>

#include "hydrocast/parallel.hpp"
#include "hydrocast/simplex.hpp"

namespace hydrocast {

std::vector<double> baseline_forecast(std::span<const double> history, SeasonPeriod s, std::size_t horizon) {
  if (s.steps < 1) throw Error(Errc::InvalidConfig, "season period must be positive");
  const auto season = static_cast<std::size_t>(s.steps);
  if (history.size() < 2 * season) {
    throw Error(Errc::InsufficientHistory, "baseline needs " + std::to_string(2 * season) + " observations, got " +
                                               std::to_string(history.size()));
  }
  std::vector<double> extended(history.begin(), history.end());
  extended.reserve(history.size() + horizon);
  for (std::size_t h = 0; h < horizon; ++h) {
    const std::size_t i = extended.size();
    extended.push_back((extended[i - season] + extended[i - 2 * season]) / 2.0);
  }
  return {extended.begin() + static_cast<std::ptrdiff_t>(history.size()), extended.end()};
}

std::vector<double> baseline_forecast(const Series& series, SeasonPeriod s, std::size_t horizon) {
  return baseline_forecast(series.values(), s, horizon);
}

Differenced seasonal_difference(std::span<const double> values, SeasonPeriod s, int seasonal_order, int order) {
  if (s.steps < 1 || seasonal_order < 0 || order < 0) {
    throw Error(Errc::InvalidConfig, "differencing orders must be non-negative and s positive");
  }
  const auto consumed = static_cast<std::size_t>(seasonal_order) * static_cast<std::size_t>(s.steps) +
                        static_cast<std::size_t>(order);
  if (values.size() <= consumed) {
    throw Error(Errc::InsufficientHistory, "differencing consumes " + std::to_string(consumed) + " of " +
                                               std::to_string(values.size()) + " observations");
  }
  Differenced out;
  out.context.period = s;
  out.context.seasonal_order = seasonal_order;
  out.context.order = order;
  std::vector<double> current(values.begin(), values.end());
  const int total = seasonal_order + order;
  for (int stage = 0; stage < total; ++stage) {
    const std::size_t lag = out.context.lag(static_cast<std::size_t>(stage));
    out.context.heads.emplace_back(current.begin(), current.begin() + static_cast<std::ptrdiff_t>(lag));
    out.context.tails.emplace_back(current.end() - static_cast<std::ptrdiff_t>(lag), current.end());
    std::vector<double> next(current.size() - lag);
    for (std::size_t i = 0; i < next.size(); ++i) next[i] = current[i + lag] - current[i];
    current = std::move(next);
  }
  out.values = std::move(current);
  return out;
}

std::vector<double> invert_difference(std::span<const double> differenced, const DifferencingContext& context) {
  std::vector<double> current(differenced.begin(), differenced.end());
  for (std::size_t stage = context.stages(); stage-- > 0;) {
    const std::size_t lag = context.lag(stage);
    std::vector<double> prev = context.heads[stage];
    prev.resize(lag + current.size());
    for (std::size_t i = 0; i < current.size(); ++i) prev[i + lag] = current[i] + prev[i];
    current = std::move(prev);
  }
  return current;
}

std::vector<double> integrate_forecast(std::span<const double> future, const DifferencingContext& context) {
  std::vector<double> current(future.begin(), future.end());
  for (std::size_t stage = context.stages(); stage-- > 0;) {
    const std::size_t lag = context.lag(stage);
    std::vector<double> extended = context.tails[stage];
    extended.reserve(lag + current.size());
    for (double step : current) extended.push_back(step + extended[extended.size() - lag]);
    current.assign(extended.begin() + static_cast<std::ptrdiff_t>(lag), extended.end());
  }
  return current;
}

void SarimaOrder::validate() const {
  for (int o : {p, d, q, P, D, Q}) {
    if (o < 0 || o > 2) throw Error(Errc::InvalidConfig, "SARIMA orders must be in 0..2: " + to_string());
  }
  if (d + D > 2) throw Error(Errc::InvalidConfig, "d + D must not exceed 2: " + to_string());
  if (s.steps < 1) throw Error(Errc::InvalidConfig, "season period must be positive");
}

std::string SarimaOrder::to_string() const {
  return "(" + std::to_string(p) + "," + std::to_string(d) + "," + std::to_string(q) + ")(" + std::to_string(P) +
         "," + std::to_string(D) + "," + std::to_string(Q) + ")_" + std::to_string(s.steps);
}

namespace {

// (1 + a_1 B + ...)(1 + b_1 B^s + ...) with the leading 1 implicit in both.
std::vector<double> multiply_lag_polynomials(std::span<const double> regular, std::span<const double> seasonal,
                                             std::size_t s) {
  const std::size_t degree = regular.size() + seasonal.size() * s;
  std::vector<double> out(degree, 0.0);
  for (std::size_t i = 0; i <= regular.size(); ++i) {
    const double a = i == 0 ? 1.0 : regular[i - 1];
    for (std::size_t j = 0; j <= seasonal.size(); ++j) {
      const double b = j == 0 ? 1.0 : seasonal[j - 1];
      const std::size_t lag = i + j * s;
      if (lag > 0) out[lag - 1] += a * b;
    }
  }
  return out;
}

double clamp_coefficient(double x) { return std::clamp(x, -kCoefficientBound, kCoefficientBound); }

void assign_coefficients(SarimaModel& model, std::span<const double> x) {
  const auto& o = model.order;
  auto take = [&, pos = std::size_t{0}](int count) mutable {
    std::vector<double> out;
    for (int k = 0; k < count; ++k) out.push_back(clamp_coefficient(x[pos++]));
    return out;
  };
  model.ar = take(o.p);
  model.ma = take(o.q);
  model.sar = take(o.P);
  model.sma = take(o.Q);
}

double sum_of_squares(std::span<const double> residuals, std::size_t skip) {
  double sse = 0.0;
  for (std::size_t t = skip; t < residuals.size(); ++t) sse += residuals[t] * residuals[t];
  return sse;
}

std::vector<double> demean(std::span<const double> z, double mean) {
  std::vector<double> w(z.begin(), z.end());
  for (auto& v : w) v -= mean;
  return w;
}

}  // namespace

ExpandedArma expand(const SarimaModel& model) {
  const auto s = static_cast<std::size_t>(model.order.s.steps);
  std::vector<double> ar_reg, ar_seas;
  for (double phi : model.ar) ar_reg.push_back(-phi);
  for (double phi : model.sar) ar_seas.push_back(-phi);
  ExpandedArma out;
  out.ar = multiply_lag_polynomials(ar_reg, ar_seas, s);
  for (auto& c : out.ar) c = -c;
  out.ma = multiply_lag_polynomials(model.ma, model.sma, s);
  return out;
}

std::vector<double> css_residuals(std::span<const double> demeaned, const ExpandedArma& arma) {
  const std::size_t n = demeaned.size();
  const std::size_t start = std::min(arma.ar.size(), n);
  std::vector<double> e(n, 0.0);
  for (std::size_t t = start; t < n; ++t) {
    double v = demeaned[t];
    for (std::size_t k = 1; k <= arma.ar.size(); ++k) v -= arma.ar[k - 1] * demeaned[t - k];
    for (std::size_t k = 1; k <= arma.ma.size() && k <= t; ++k) v -= arma.ma[k - 1] * e[t - k];
    e[t] = v;
  }
  return e;
}

SarimaModel fit_sarima(std::span<const double> values, const SarimaOrder& order) {
  order.validate();
  const auto diff = seasonal_difference(values, order.s, order.D, order.d);
  const std::size_t n = diff.values.size();
  const int k = order.n_coefficients();
  if (n < static_cast<std::size_t>(3 * (k + 1))) {
    throw Error(Errc::InsufficientHistory, order.to_string() + " needs " + std::to_string(3 * (k + 1)) +
                                               " differenced observations, got " + std::to_string(n));
  }

  SarimaModel model;
  model.order = order;
  model.intercept = std::accumulate(diff.values.begin(), diff.values.end(), 0.0) / static_cast<double>(n);
  const auto w = demean(diff.values, model.intercept);
  const std::size_t conditioning =
      static_cast<std::size_t>(order.p) + static_cast<std::size_t>(order.P) * static_cast<std::size_t>(order.s.steps);
  if (n <= conditioning + static_cast<std::size_t>(k)) {
    throw Error(Errc::InsufficientHistory, order.to_string() + " leaves too few residuals");
  }

  auto objective = [&](std::span<const double> x) {
    SarimaModel trial;
    trial.order = order;
    assign_coefficients(trial, x);
    return sum_of_squares(css_residuals(w, expand(trial)), conditioning);
  };

  std::vector<double> start(static_cast<std::size_t>(k), 0.1);
  const auto result = nelder_mead(objective, start);
  if (!result.converged) {
    throw Error(Errc::NonConvergence, order.to_string() + " after " + std::to_string(result.iterations) + " iterations");
  }
  assign_coefficients(model, result.x);
  model.iterations = result.iterations;
  model.n_residuals = n - conditioning;
  const double sse = sum_of_squares(css_residuals(w, expand(model)), conditioning);
  model.sigma2 = std::max(sse / static_cast<double>(model.n_residuals), kSigma2Floor);
  model.aic = static_cast<double>(model.n_residuals) * std::log(model.sigma2) + 2.0 * (k + 1);
  if (!std::isfinite(model.aic)) {
    throw Error(Errc::NonConvergence, order.to_string() + " produced a non-finite residual variance");
  }
  return model;
}

SarimaModel fit_sarima(const Series& series, const SarimaOrder& order) { return fit_sarima(series.values(), order); }

std::vector<SarimaOrder> default_order_grid(SeasonPeriod s) {
  std::vector<SarimaOrder> grid;
  for (int p = 0; p <= 1; ++p)
    for (int d = 0; d <= 1; ++d)
      for (int q = 0; q <= 1; ++q)
        for (int P = 0; P <= 1; ++P)
          for (int D = 0; D <= 1 - d; ++D)
            for (int Q = 0; Q <= 1; ++Q) grid.push_back({p, d, q, P, D, Q, s});
  return grid;
}

SarimaModel select_model(std::span<const double> values, std::span<const SarimaOrder> grid, unsigned workers) {
  if (grid.empty()) throw Error(Errc::InvalidConfig, "empty order grid");
  std::vector<std::optional<SarimaModel>> fits(grid.size());
  parallel_for(grid.size(), workers, [&](std::size_t g) {
    try {
      fits[g] = fit_sarima(values, grid[g]);
    } catch (const Error&) {
    }
  });

  auto key = [](const SarimaModel& m) {
    const auto& o = m.order;
    return std::make_tuple(m.aic, o.n_coefficients(), o.p, o.d, o.q, o.P, o.D, o.Q);
  };
  const SarimaModel* best = nullptr;
  for (const auto& fit : fits) {
    if (fit && (!best || key(*fit) < key(*best))) best = &*fit;
  }
  if (!best) throw Error(Errc::AllFitsFailed, "none of " + std::to_string(grid.size()) + " orders could be fitted");
  return *best;
}

SarimaOrder select_order(std::span<const double> values, std::span<const SarimaOrder> grid, unsigned workers) {
  return select_model(values, grid, workers).order;
}

SarimaOrder select_order(const Series& series, std::span<const SarimaOrder> grid, unsigned workers) {
  return select_order(series.values(), grid, workers);
}

std::vector<double> sarima_forecast(const SarimaModel& model, std::span<const double> values, std::size_t horizon) {
  if (horizon == 0) return {};
  const auto diff = seasonal_difference(values, model.order.s, model.order.D, model.order.d);
  const auto arma = expand(model);
  auto w = demean(diff.values, model.intercept);
  auto e = css_residuals(w, arma);

  const std::size_t n = w.size();
  w.resize(n + horizon, 0.0);
  e.resize(n + horizon, 0.0);
  for (std::size_t t = n; t < n + horizon; ++t) {
    double v = 0.0;
    for (std::size_t k = 1; k <= arma.ar.size() && k <= t; ++k) v += arma.ar[k - 1] * w[t - k];
    for (std::size_t k = 1; k <= arma.ma.size() && k <= t; ++k) v += arma.ma[k - 1] * e[t - k];
    w[t] = v;
  }
  std::vector<double> future(w.begin() + static_cast<std::ptrdiff_t>(n), w.end());
  for (auto& v : future) v += model.intercept;
  return integrate_forecast(future, diff.context);
}

std::vector<double> sarima_forecast(const SarimaModel& model, const Series& series, std::size_t horizon) {
  return sarima_forecast(model, series.values(), horizon);
}

std::string to_json(const SarimaModel& model) {
  const auto& o = model.order;
  nlohmann::ordered_json j;
  j["order"] = {{"p", o.p}, {"d", o.d}, {"q", o.q}, {"P", o.P}, {"D", o.D}, {"Q", o.Q}, {"s", o.s.steps}};
  j["ar"] = model.ar;
  j["ma"] = model.ma;
  j["sar"] = model.sar;
  j["sma"] = model.sma;
  j["intercept"] = model.intercept;
  j["sigma2"] = model.sigma2;
  j["aic"] = model.aic;
  j["n_residuals"] = model.n_residuals;
  return j.dump(2);
}

}  // namespace hydrocast
