#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "hydrocast/core.hpp"

namespace hydrocast {

enum class CellKind { Lstm, Gru };

std::string_view to_string(CellKind kind) noexcept;
/// "lstm" or "gru"; throws ConfigError otherwise.
CellKind parse_cell_kind(std::string_view name);

/// One LSTM gate: pre-activation = input_weights * x + recurrent_weights * h + bias.
struct LstmGate {
  Eigen::MatrixXd input_weights;      // H x input
  Eigen::MatrixXd recurrent_weights;  // H x H
  Eigen::VectorXd bias;               // H
};

struct LstmParams {
  LstmGate forget;
  LstmGate input;
  LstmGate candidate;  // the tanh input node
  LstmGate output;

  static LstmParams zeros(int input_size, int hidden_size);
  int hidden_size() const { return static_cast<int>(forget.bias.size()); }
  int input_size() const { return static_cast<int>(forget.input_weights.cols()); }
};

struct LstmState {
  Eigen::VectorXd hidden;
  Eigen::VectorXd cell;
};

/// Acts on the concatenation (h_{t-1}, x_t): the first H columns read the
/// hidden state, the rest read the input.
struct GruGate {
  Eigen::MatrixXd weights;  // H x (H + input)
  Eigen::VectorXd bias;
};

struct GruParams {
  GruGate update;
  GruGate reset;
  GruGate candidate;

  static GruParams zeros(int input_size, int hidden_size);
  int hidden_size() const { return static_cast<int>(update.bias.size()); }
  int input_size() const { return static_cast<int>(update.weights.cols()) - hidden_size(); }
};

/// One LSTM time step with logistic gates and tanh nonlinearity.
/// Throws ShapeMismatch, NonFiniteActivation.
LstmState lstm_step(const LstmParams& params, const Eigen::VectorXd& x, const LstmState& state);

/// One GRU time step. Throws ShapeMismatch, NonFiniteActivation.
Eigen::VectorXd gru_step(const GruParams& params, const Eigen::VectorXd& x, const Eigen::VectorXd& hidden);

/// Trainable cell parameters, output head excluded.
std::size_t param_count(CellKind kind, int input_size, int hidden_size);

/// Min-max scaling to [0, 1]. A constant training set maps to 0.5 and
/// denormalizes back to its constant.
struct Normalization {
  double min = 0.0;
  double max = 1.0;

  static Normalization fit(std::span<const double> values);
  bool degenerate() const { return !(max > min); }
  double normalize(double v) const { return degenerate() ? 0.5 : (v - min) / (max - min); }
  double denormalize(double y) const { return degenerate() ? min : min + y * (max - min); }

  friend bool operator==(const Normalization&, const Normalization&) = default;
};

struct TrainConfig {
  int epochs = 200;
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  int hidden_size = 8;
  int window = 4;
  double clip_norm = 5.0;
  std::uint64_t seed = 0;

  /// Throws InvalidConfig.
  void validate() const;
};

/// Single recurrent layer unrolled over a window, followed by a linear head
/// H -> 1. Weights are one flat vector in the serialized order: per gate
/// (f, i, g, o for LSTM; u, r, h for GRU) the row-major weight block(s) then
/// the bias, followed by the head weights and head bias.
struct RecurrentModel {
  CellKind kind = CellKind::Lstm;
  int input_size = 1;
  int hidden_size = 8;
  int window = 4;
  std::vector<double> weights;
  Normalization norm;
  std::uint64_t seed = 0;
  std::vector<double> train_log;  // full-batch loss at the start of each epoch

  /// Zero weights of the right size.
  static RecurrentModel zeros(CellKind kind, int hidden_size, int window);
  std::size_t n_weights() const { return param_count(kind, input_size, hidden_size) + hidden_size + 1; }
  LstmParams lstm() const;
  GruParams gru() const;
  double head_bias() const { return weights.back(); }

  friend bool operator==(const RecurrentModel&, const RecurrentModel&) = default;
};

std::vector<double> pack(const LstmParams& params);
std::vector<double> pack(const GruParams& params);

/// Inputs and next-step target, both normalized.
struct TrainingWindow {
  std::vector<double> inputs;
  double target = 0.0;
};

/// Every run of `window` consecutive values with the value that follows.
std::vector<TrainingWindow> sliding_windows(std::span<const double> normalized, int window);

/// Normalized one-step prediction from a window of normalized values.
/// Throws ShapeMismatch when the window length differs from model.window.
double forward(const RecurrentModel& model, std::span<const double> window);

/// Mean squared error over the batch.
double batch_loss(const RecurrentModel& model, std::span<const TrainingWindow> batch);

/// Loss and its gradient with respect to model.weights by backpropagation
/// through time.
struct LossGradient {
  double loss = 0.0;
  std::vector<double> gradient;
};

LossGradient loss_gradient(const RecurrentModel& model, std::span<const TrainingWindow> batch);

/// (f(x + h) - f(x - h)) / 2h.
double central_difference(const std::function<double(double)>& f, double x, double h = 1e-5);

/// Central difference of batch_loss along one weight coordinate.
double numeric_gradient(const RecurrentModel& model, std::span<const TrainingWindow> batch, std::size_t coordinate,
                        double h = 1e-5);

/// Full-batch Adam on the pooled windows of every series. One series gives a
/// per-series model; several give a per-cluster model sharing one
/// normalization. Throws InsufficientHistory, DivergedLoss.
RecurrentModel train(std::span<const std::vector<double>> series_set, CellKind kind, const TrainConfig& config);

/// Recursive multi-step forecast in m^3, clipped at zero. Throws
/// InsufficientHistory when history is shorter than the window.
std::vector<double> predict(const RecurrentModel& model, std::span<const double> history, std::size_t horizon);

std::string to_json(const RecurrentModel& model);
RecurrentModel recurrent_model_from_json(const std::string& text);

}  // namespace hydrocast
