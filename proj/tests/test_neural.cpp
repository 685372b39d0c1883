#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hydrocast/neural.hpp"
#include "support/cell_fixtures.hpp"

using namespace hydrocast;

namespace {

std::vector<double> sinusoid(std::size_t n, double level = 20.0, double amplitude = 5.0) {
  std::vector<double> y(n);
  for (std::size_t t = 0; t < n; ++t) y[t] = level + amplitude * std::sin(std::numbers::pi / 2 * static_cast<double>(t));
  return y;
}

double variance(const std::vector<double>& y) {
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double s = 0.0;
  for (double v : y) s += (v - mean) * (v - mean);
  return s / static_cast<double>(y.size());
}

}  // namespace

TEST_CASE("zero LSTM maps the zero state to zero") {
  const auto p = LstmParams::zeros(1, 4);
  const auto next = lstm_step(p, Eigen::VectorXd::Constant(1, 3.7), {Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(4)});
  CHECK(next.hidden.isZero(0.0));
  CHECK(next.cell.isZero(0.0));
}

TEST_CASE("a saturated forget gate preserves the cell state") {
  auto p = LstmParams::zeros(1, 3);
  p.forget.bias.setConstant(50.0);
  const Eigen::VectorXd c = Eigen::VectorXd::LinSpaced(3, -2.0, 2.0);
  const auto next = lstm_step(p, Eigen::VectorXd::Constant(1, 1.0), {Eigen::VectorXd::Zero(3), c});
  CHECK((next.cell - c).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("zero GRU maps the zero state to zero") {
  const auto p = GruParams::zeros(2, 5);
  CHECK(gru_step(p, Eigen::VectorXd::Constant(2, -1.0), Eigen::VectorXd::Zero(5)).isZero(0.0));
}

TEST_CASE("a saturated update gate holds the hidden state") {
  std::mt19937_64 rng(1);
  auto p = fixtures::random_gru(rng, 1, 4);
  p.update.weights.setZero();
  p.update.bias.setConstant(50.0);
  const Eigen::VectorXd h = fixtures::random_vector(rng, 4, 1.0);
  const auto next = gru_step(p, Eigen::VectorXd::Constant(1, 0.3), h);
  CHECK((next - h).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("cells match the scalar-loop oracle") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const int input = 1 + trial % 3;
    const int hidden = 1 + trial % 7;
    const auto lstm = fixtures::random_lstm(rng, input, hidden);
    const auto x = fixtures::random_vector(rng, input, 2.0);
    const auto h = fixtures::random_vector(rng, hidden, 1.0);
    const auto s = fixtures::random_vector(rng, hidden, 2.0);
    const auto got = lstm_step(lstm, x, {h, s});
    const auto [want_h, want_s] =
        oracle::lstm_step(fixtures::to_oracle(lstm), fixtures::to_nested(x), fixtures::to_nested(h), fixtures::to_nested(s));
    CHECK(fixtures::max_abs_diff(got.hidden, want_h) < 1e-12);
    CHECK(fixtures::max_abs_diff(got.cell, want_s) < 1e-12);

    const auto gru = fixtures::random_gru(rng, input, hidden);
    const auto got_gru = gru_step(gru, x, h);
    const auto want_gru = oracle::gru_step(fixtures::to_oracle(gru), fixtures::to_nested(x), fixtures::to_nested(h));
    CHECK(fixtures::max_abs_diff(got_gru, want_gru) < 1e-12);
  }
}

TEST_CASE("cells reject mismatched shapes") {
  const auto p = LstmParams::zeros(2, 3);
  auto code = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::IoError;
  };
  CHECK(code([&] { lstm_step(p, Eigen::VectorXd::Zero(1), {Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3)}); }) ==
        Errc::ShapeMismatch);
  CHECK(code([&] { lstm_step(p, Eigen::VectorXd::Zero(2), {Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(3)}); }) ==
        Errc::ShapeMismatch);
  CHECK(code([&] { gru_step(GruParams::zeros(1, 3), Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(4)); }) ==
        Errc::ShapeMismatch);
  CHECK(code([&] {
          lstm_step(p, Eigen::VectorXd::Constant(2, std::nan("")), {Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3)});
        }) == Errc::NonFiniteActivation);
}

TEST_CASE("parameter counts") {
  CHECK(param_count(CellKind::Lstm, 1, 8) == 320);
  CHECK(param_count(CellKind::Gru, 1, 8) == 240);
  CHECK(param_count(CellKind::Lstm, 1, 1) == 12);
  CHECK(param_count(CellKind::Gru, 1, 1) == 9);
  for (int input = 1; input <= 5; ++input) {
    for (int hidden = 1; hidden <= 40; ++hidden) {
      CHECK(4 * param_count(CellKind::Gru, input, hidden) == 3 * param_count(CellKind::Lstm, input, hidden));
    }
  }
  CHECK(pack(LstmParams::zeros(1, 8)).size() == 320);
  CHECK(pack(GruParams::zeros(1, 8)).size() == 240);
}

TEST_CASE("packing and unpacking agree") {
  std::mt19937_64 rng(3);
  auto model = fixtures::random_model(rng, CellKind::Lstm, 3, 4);
  auto cell = pack(model.lstm());
  CHECK(std::equal(cell.begin(), cell.end(), model.weights.begin()));
  // First block is W_fx row-major.
  CHECK(model.lstm().forget.input_weights(1, 0) == model.weights[1]);
  auto gru = fixtures::random_model(rng, CellKind::Gru, 3, 4);
  cell = pack(gru.gru());
  CHECK(std::equal(cell.begin(), cell.end(), gru.weights.begin()));
  CHECK(gru.gru().update.weights(0, 1) == gru.weights[1]);
  CHECK(gru.gru().update.weights(1, 0) == gru.weights[4]);
}

TEST_CASE("forward basics") {
  auto zero = RecurrentModel::zeros(CellKind::Gru, 4, 3);
  zero.weights.back() = 0.625;
  const std::vector<double> window{0.1, 0.2, 0.3};
  CHECK(forward(zero, window) == 0.625);
  CHECK_THROWS_AS(forward(zero, std::vector<double>{0.1}), Error);

  std::mt19937_64 rng(4);
  const auto model = fixtures::random_model(rng, CellKind::Lstm, 5, 1);
  const std::vector<double> one{0.4};
  const auto next = lstm_step(model.lstm(), Eigen::VectorXd::Constant(1, 0.4),
                              {Eigen::VectorXd::Zero(5), Eigen::VectorXd::Zero(5)});
  double expected = model.head_bias();
  for (int k = 0; k < 5; ++k) expected += model.weights[model.weights.size() - 6 + k] * next.hidden[k];
  CHECK(forward(model, one) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(forward(model, one) == forward(model, one));
}

TEST_CASE("central differences") {
  CHECK(central_difference([](double t) { return t * t; }, 3.0) == doctest::Approx(6.0).epsilon(1e-9));
  std::mt19937_64 rng(5);
  // The recurrent weights see a zero state on the first step only, so with a
  // one-step window they cannot affect the loss.
  auto short_model = fixtures::random_model(rng, CellKind::Lstm, 3, 1);
  const auto short_batch = fixtures::random_batch(rng, 1, 5);
  const std::size_t recurrent = 3;  // first W_fh entry
  CHECK(std::abs(numeric_gradient(short_model, short_batch, recurrent)) < 1e-10);
  CHECK(std::abs(loss_gradient(short_model, short_batch).gradient[recurrent]) < 1e-12);
}

TEST_CASE("BPTT gradients agree with central differences") {
  std::mt19937_64 rng(6);
  for (CellKind kind : {CellKind::Lstm, CellKind::Gru}) {
    const auto model = fixtures::random_model(rng, kind, 4, 4);
    const auto batch = fixtures::random_batch(rng, 4, 7);
    const auto grad = loss_gradient(model, batch);
    CHECK(grad.loss == doctest::Approx(batch_loss(model, batch)).epsilon(1e-14));
    REQUIRE(grad.gradient.size() == model.n_weights());
    for (std::size_t k = 0; k < model.n_weights(); ++k) {
      const double numeric = numeric_gradient(model, batch, k);
      const double scale = std::max({std::abs(numeric), std::abs(grad.gradient[k]), 1e-8});
      CHECK(std::abs(numeric - grad.gradient[k]) / scale < 1e-4);
    }
  }
}

TEST_CASE("normalization") {
  const std::vector<double> v{3.0, 7.0, 5.0};
  const auto n = Normalization::fit(v);
  CHECK(n.normalize(3.0) == 0.0);
  CHECK(n.normalize(7.0) == 1.0);
  for (double x : {-4.1, 0.0, 3.3, 6.9, 1e3}) CHECK(n.denormalize(n.normalize(x)) == doctest::Approx(x).epsilon(1e-12));
  const auto flat = Normalization::fit(std::vector<double>{2.5, 2.5});
  CHECK(flat.normalize(2.5) == 0.5);
  CHECK(flat.denormalize(0.5) == 2.5);
}

TEST_CASE("sliding windows") {
  const std::vector<double> v{1, 2, 3, 4, 5};
  const auto w = sliding_windows(v, 3);
  REQUIRE(w.size() == 2);
  CHECK(w[0].inputs == std::vector<double>{1, 2, 3});
  CHECK(w[0].target == 4);
  CHECK(w[1].target == 5);
}

TEST_CASE("training fits a noiseless seasonal sinusoid") {
  const auto y = sinusoid(200);
  TrainConfig config;
  config.seed = 1;
  for (CellKind kind : {CellKind::Lstm, CellKind::Gru}) {
    const std::vector<std::vector<double>> set{y};
    const auto model = train(set, kind, config);
    REQUIRE(model.train_log.size() == 200);
    // Loss on the original scale.
    double mse = 0.0;
    const auto windows = sliding_windows(y, config.window);
    for (const auto& w : windows) {
      std::vector<double> in;
      for (double x : w.inputs) in.push_back(model.norm.normalize(x));
      const double e = model.norm.denormalize(forward(model, in)) - w.target;
      mse += e * e;
    }
    mse /= static_cast<double>(windows.size());
    MESSAGE(to_string(kind) << " mse " << mse << " variance " << variance(y));
    CHECK(mse < 0.01 * variance(y));
    CHECK(std::is_sorted(model.train_log.rbegin(), model.train_log.rend()));
    // Weak monotonicity over consecutive 10-epoch spans.
    for (std::size_t start = 10; start + 10 <= model.train_log.size(); start += 10) {
      const double earlier = *std::min_element(model.train_log.begin() + start - 10, model.train_log.begin() + start);
      const double later = *std::min_element(model.train_log.begin() + start, model.train_log.begin() + start + 10);
      CHECK(later <= earlier);
    }
  }
}

TEST_CASE("training is deterministic in data and config") {
  const auto y = sinusoid(30);
  const std::vector<std::vector<double>> set{y};
  TrainConfig config;
  config.epochs = 20;
  config.seed = 9;
  CHECK(train(set, CellKind::Gru, config) == train(set, CellKind::Gru, config));
  auto other = config;
  other.seed = 10;
  CHECK_FALSE(train(set, CellKind::Gru, other).weights == train(set, CellKind::Gru, config).weights);
}

TEST_CASE("duplicated series train like a single series") {
  const auto y = sinusoid(22, 30.0, 8.0);
  TrainConfig config;
  config.epochs = 30;
  config.seed = 5;
  const std::vector<std::vector<double>> one{y};
  const std::vector<std::vector<double>> three{y, y, y};
  const auto a = train(one, CellKind::Lstm, config);
  const auto b = train(three, CellKind::Lstm, config);
  REQUIRE(a.weights.size() == b.weights.size());
  for (std::size_t k = 0; k < a.weights.size(); ++k) CHECK(a.weights[k] == doctest::Approx(b.weights[k]).epsilon(1e-6));
}

TEST_CASE("training validates its input") {
  TrainConfig config;
  const std::vector<std::vector<double>> short_set{{1.0, 2.0, 3.0, 4.0}};
  CHECK_THROWS_AS(train(short_set, CellKind::Lstm, config), Error);
  config.learning_rate = 0.0;
  const std::vector<std::vector<double>> ok{{1.0, 2.0, 3.0, 4.0, 5.0}};
  CHECK_THROWS_AS(train(ok, CellKind::Lstm, config), Error);
}

TEST_CASE("prediction") {
  TrainConfig config;
  config.epochs = 50;
  const std::vector<double> flat(22, 17.5);
  const std::vector<std::vector<double>> set{flat};
  const auto model = train(set, CellKind::Gru, config);
  CHECK(predict(model, flat, 0).empty());
  for (double f : predict(model, flat, 6)) CHECK(std::abs(f - 17.5) <= 0.01 * 17.5);
  CHECK_THROWS_AS(predict(model, std::vector<double>{1.0, 2.0}, 3), Error);

  // Forecasts are clipped at zero.
  auto negative = RecurrentModel::zeros(CellKind::Lstm, 2, 4);
  negative.norm = {0.0, 10.0};
  negative.weights.back() = -3.0;
  for (double f : predict(negative, std::vector<double>{1, 2, 3, 4}, 3)) CHECK(f == 0.0);
}

TEST_CASE("models survive a JSON round trip") {
  const std::vector<std::vector<double>> set{sinusoid(24)};
  TrainConfig config;
  config.epochs = 5;
  const auto model = train(set, CellKind::Lstm, config);
  CHECK(recurrent_model_from_json(to_json(model)) == model);
  CHECK_THROWS_AS(recurrent_model_from_json("{\"kind\": \"rnn\"}"), Error);
}

TEST_CASE("cell kind names") {
  CHECK(parse_cell_kind("lstm") == CellKind::Lstm);
  CHECK(parse_cell_kind("gru") == CellKind::Gru);
  CHECK_THROWS_AS(parse_cell_kind("rnn"), Error);
}
