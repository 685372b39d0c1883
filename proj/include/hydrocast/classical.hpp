#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hydrocast/core.hpp"

namespace hydrocast {

/// Seasonal-mean baseline: each step forecasts the mean of the values one and
/// two seasons back. Later steps reuse earlier forecasts where actuals are not
/// yet available. Throws InsufficientHistory when history < 2s.
std::vector<double> baseline_forecast(std::span<const double> history, SeasonPeriod s, std::size_t horizon);
std::vector<double> baseline_forecast(const Series& series, SeasonPeriod s, std::size_t horizon);

/// What differencing consumed at each stage. Stage k (0-based) uses lag s for
/// k < D and lag 1 afterwards; heads[k] and tails[k] are the first and last
/// `lag` values of that stage's input.
struct DifferencingContext {
  SeasonPeriod period{4};
  int seasonal_order = 0;
  int order = 0;
  std::vector<std::vector<double>> heads;
  std::vector<std::vector<double>> tails;

  std::size_t lag(std::size_t stage) const {
    return stage < static_cast<std::size_t>(seasonal_order) ? static_cast<std::size_t>(period.steps) : 1;
  }
  std::size_t stages() const { return heads.size(); }
};

struct Differenced {
  std::vector<double> values;
  DifferencingContext context;
};

/// Seasonal differencing D times, then ordinary differencing d times.
/// Throws InsufficientHistory unless length > D*s + d.
Differenced seasonal_difference(std::span<const double> values, SeasonPeriod s, int seasonal_order, int order);

/// Rebuilds the undifferenced series from the differenced one and the heads.
std::vector<double> invert_difference(std::span<const double> differenced, const DifferencingContext& context);

/// Carries forecasts made on the differenced scale back to the original scale,
/// continuing from the tails.
std::vector<double> integrate_forecast(std::span<const double> future, const DifferencingContext& context);

struct SarimaOrder {
  int p = 0, d = 0, q = 0;
  int P = 0, D = 0, Q = 0;
  SeasonPeriod s{4};

  int n_coefficients() const { return p + q + P + Q; }
  /// Throws InvalidConfig unless every order is in 0..2, d + D <= 2, s >= 1.
  void validate() const;
  std::string to_string() const;
  friend bool operator==(const SarimaOrder&, const SarimaOrder&) = default;
};

struct SarimaModel {
  SarimaOrder order;
  std::vector<double> ar;   // phi_1..phi_p
  std::vector<double> ma;   // theta_1..theta_q
  std::vector<double> sar;  // Phi_1..Phi_P
  std::vector<double> sma;  // Theta_1..Theta_Q
  double intercept = 0.0;   // mean of the differenced series
  double sigma2 = 0.0;
  double aic = 0.0;
  std::size_t n_residuals = 0;
  int iterations = 0;
};

inline constexpr double kCoefficientBound = 0.99;
inline constexpr double kSigma2Floor = 1e-12;

/// Lag polynomials after multiplying out the seasonal factors.
/// ar[k-1] multiplies w_{t-k}; ma[k-1] multiplies e_{t-k}.
struct ExpandedArma {
  std::vector<double> ar;
  std::vector<double> ma;
};

ExpandedArma expand(const SarimaModel& model);

/// One-step residuals of the expanded recursion on the demeaned differenced
/// series; entries before the largest AR lag are zero and not counted.
std::vector<double> css_residuals(std::span<const double> demeaned, const ExpandedArma& arma);

/// Conditional-sum-of-squares fit with a Nelder-Mead search, each coefficient
/// clamped to (-0.99, 0.99). Throws InsufficientHistory, NonConvergence.
SarimaModel fit_sarima(std::span<const double> values, const SarimaOrder& order);
SarimaModel fit_sarima(const Series& series, const SarimaOrder& order);

/// p, q, P, Q in {0, 1}; d, D in {0, 1} with d + D <= 1; s = 4.
std::vector<SarimaOrder> default_order_grid(SeasonPeriod s = kQuarterly);

/// Fits every grid order and keeps the lowest AIC; ties go to fewer
/// coefficients, then to lexicographic (p, d, q, P, D, Q). Throws
/// AllFitsFailed when no order could be fitted.
SarimaModel select_model(std::span<const double> values, std::span<const SarimaOrder> grid, unsigned workers = 1);
SarimaOrder select_order(std::span<const double> values, std::span<const SarimaOrder> grid, unsigned workers = 1);
SarimaOrder select_order(const Series& series, std::span<const SarimaOrder> grid, unsigned workers = 1);

/// Multi-step forecast with future shocks set to zero. `values` must be the
/// series the model was fitted on.
std::vector<double> sarima_forecast(const SarimaModel& model, std::span<const double> values, std::size_t horizon);
std::vector<double> sarima_forecast(const SarimaModel& model, const Series& series, std::size_t horizon);

/// Debug dump: orders, coefficients, sigma2, aic.
std::string to_json(const SarimaModel& model);

}  // namespace hydrocast
