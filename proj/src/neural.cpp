#include "hydrocast/neural.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace hydrocast {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string_view to_string(CellKind kind) noexcept { return kind == CellKind::Lstm ? "lstm" : "gru"; }

CellKind parse_cell_kind(std::string_view name) {
  if (name == "lstm") return CellKind::Lstm;
  if (name == "gru") return CellKind::Gru;
  throw Error(Errc::ConfigError, "unknown cell kind '" + std::string(name) + "'");
}

namespace {

VectorXd logistic(const VectorXd& a) {
  return a.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

VectorXd tanh_of(const VectorXd& a) {
  return a.unaryExpr([](double v) { return std::tanh(v); });
}

// Saturated activations round to the closed interval in double precision.
void check_range([[maybe_unused]] const VectorXd& v, [[maybe_unused]] double low, [[maybe_unused]] double high) {
#ifdef HYDROCAST_GATE_CHECKS
  for (double x : v) {
    if (!(x >= low && x <= high)) throw std::logic_error("activation outside its range");
  }
#endif
}

void check_finite(const VectorXd& v, const char* what) {
  if (!v.allFinite()) throw Error(Errc::NonFiniteActivation, what);
}

LstmGate zero_gate(int input_size, int hidden_size) {
  return {MatrixXd::Zero(hidden_size, input_size), MatrixXd::Zero(hidden_size, hidden_size),
          VectorXd::Zero(hidden_size)};
}

GruGate zero_gru_gate(int input_size, int hidden_size) {
  return {MatrixXd::Zero(hidden_size, hidden_size + input_size), VectorXd::Zero(hidden_size)};
}

struct LstmTrace {
  VectorXd forget, input, candidate, output;
  VectorXd cell, tanh_cell, hidden;
};

VectorXd pre_activation(const LstmGate& gate, const VectorXd& x, const VectorXd& h) {
  return gate.input_weights * x + gate.recurrent_weights * h + gate.bias;
}

LstmTrace lstm_trace(const LstmParams& p, const VectorXd& x, const VectorXd& h_prev, const VectorXd& s_prev) {
  LstmTrace t;
  t.forget = logistic(pre_activation(p.forget, x, h_prev));
  t.input = logistic(pre_activation(p.input, x, h_prev));
  t.candidate = tanh_of(pre_activation(p.candidate, x, h_prev));
  t.output = logistic(pre_activation(p.output, x, h_prev));
  t.cell = t.candidate.cwiseProduct(t.input) + s_prev.cwiseProduct(t.forget);
  t.tanh_cell = tanh_of(t.cell);
  t.hidden = t.tanh_cell.cwiseProduct(t.output);
  check_finite(t.cell, "LSTM cell state");
  check_finite(t.hidden, "LSTM hidden state");
  check_range(t.forget, 0.0, 1.0);
  check_range(t.input, 0.0, 1.0);
  check_range(t.output, 0.0, 1.0);
  check_range(t.candidate, -1.0, 1.0);
  check_range(t.tanh_cell, -1.0, 1.0);
  return t;
}

struct GruTrace {
  VectorXd joint;        // (h_{t-1}, x_t)
  VectorXd reset_joint;  // (r_t * h_{t-1}, x_t)
  VectorXd update, reset, candidate, hidden;
};

GruTrace gru_trace(const GruParams& p, const VectorXd& x, const VectorXd& h_prev) {
  const auto H = h_prev.size();
  GruTrace t;
  t.joint.resize(H + x.size());
  t.joint << h_prev, x;
  t.update = logistic(p.update.weights * t.joint + p.update.bias);
  t.reset = logistic(p.reset.weights * t.joint + p.reset.bias);
  t.reset_joint.resize(H + x.size());
  t.reset_joint << t.reset.cwiseProduct(h_prev), x;
  t.candidate = tanh_of(p.candidate.weights * t.reset_joint + p.candidate.bias);
  t.hidden = t.update.cwiseProduct(h_prev) + (VectorXd::Ones(H) - t.update).cwiseProduct(t.candidate);
  check_finite(t.hidden, "GRU hidden state");
  check_range(t.update, 0.0, 1.0);
  check_range(t.reset, 0.0, 1.0);
  check_range(t.candidate, -1.0, 1.0);
  return t;
}

void check_lstm_shapes(const LstmParams& p, const VectorXd& x, const LstmState& state) {
  const auto H = p.hidden_size();
  const auto I = p.input_size();
  for (const auto* g : {&p.forget, &p.input, &p.candidate, &p.output}) {
    if (g->input_weights.rows() != H || g->input_weights.cols() != I || g->recurrent_weights.rows() != H ||
        g->recurrent_weights.cols() != H || g->bias.size() != H) {
      throw Error(Errc::ShapeMismatch, "inconsistent LSTM gate shapes");
    }
  }
  if (x.size() != I || state.hidden.size() != H || state.cell.size() != H) {
    throw Error(Errc::ShapeMismatch, "LSTM input or state does not match parameter shapes");
  }
}

void check_gru_shapes(const GruParams& p, const VectorXd& x, const VectorXd& h) {
  const auto H = p.hidden_size();
  for (const auto* g : {&p.update, &p.reset, &p.candidate}) {
    if (g->weights.rows() != H || g->weights.cols() != p.update.weights.cols() || g->bias.size() != H) {
      throw Error(Errc::ShapeMismatch, "inconsistent GRU gate shapes");
    }
  }
  if (h.size() != H || x.size() != p.input_size() || p.input_size() < 1) {
    throw Error(Errc::ShapeMismatch, "GRU input or state does not match parameter shapes");
  }
}

class FlatReader {
 public:
  explicit FlatReader(std::span<const double> data) : data_(data) {}

  MatrixXd matrix(Eigen::Index rows, Eigen::Index cols) {
    MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data_[pos_++];
    return m;
  }
  VectorXd vector(Eigen::Index size) {
    VectorXd v(size);
    for (Eigen::Index k = 0; k < size; ++k) v(k) = data_[pos_++];
    return v;
  }
  std::size_t position() const { return pos_; }

 private:
  std::span<const double> data_;
  std::size_t pos_ = 0;
};

void append(std::vector<double>& out, const MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
}

void append(std::vector<double>& out, const VectorXd& v) { out.insert(out.end(), v.data(), v.data() + v.size()); }

LstmParams unpack_lstm(std::span<const double> flat, int I, int H) {
  FlatReader in(flat);
  LstmParams p;
  for (auto* g : {&p.forget, &p.input, &p.candidate, &p.output}) {
    g->input_weights = in.matrix(H, I);
    g->recurrent_weights = in.matrix(H, H);
    g->bias = in.vector(H);
  }
  return p;
}

GruParams unpack_gru(std::span<const double> flat, int I, int H) {
  FlatReader in(flat);
  GruParams p;
  for (auto* g : {&p.update, &p.reset, &p.candidate}) {
    g->weights = in.matrix(H, H + I);
    g->bias = in.vector(H);
  }
  return p;
}

void check_model(const RecurrentModel& model) {
  if (model.weights.size() != model.n_weights()) {
    throw Error(Errc::ShapeMismatch, "model has " + std::to_string(model.weights.size()) + " weights, expected " +
                                         std::to_string(model.n_weights()));
  }
  if (model.input_size != 1) throw Error(Errc::ShapeMismatch, "the forecasting network reads scalar inputs");
}

std::span<const double> head_weights(const RecurrentModel& model) {
  return std::span<const double>(model.weights).subspan(param_count(model.kind, 1, model.hidden_size),
                                                        static_cast<std::size_t>(model.hidden_size));
}

double head(const RecurrentModel& model, const VectorXd& h) {
  const auto w = head_weights(model);
  double y = model.head_bias();
  for (Eigen::Index k = 0; k < h.size(); ++k) y += w[static_cast<std::size_t>(k)] * h(k);
  return y;
}

VectorXd scalar(double x) { return VectorXd::Constant(1, x); }

// Accumulates the gradient of one window's squared error, scaled by `scale`
// (d loss / d prediction), into the flat gradient.
double lstm_window(const RecurrentModel& model, const LstmParams& p, const TrainingWindow& win, double weight,
                   LstmParams* grad, std::span<double> head_grad) {
  const auto H = model.hidden_size;
  std::vector<LstmTrace> traces;
  traces.reserve(win.inputs.size());
  VectorXd h = VectorXd::Zero(H), s = VectorXd::Zero(H);
  for (double x : win.inputs) {
    traces.push_back(lstm_trace(p, scalar(x), h, s));
    h = traces.back().hidden;
    s = traces.back().cell;
  }
  const double err = head(model, h) - win.target;
  if (!grad) return err * err;

  const double dpred = 2.0 * err * weight;
  const auto w = head_weights(model);
  VectorXd dh(H);
  for (Eigen::Index k = 0; k < H; ++k) {
    head_grad[static_cast<std::size_t>(k)] += dpred * h(k);
    dh(k) = dpred * w[static_cast<std::size_t>(k)];
  }
  head_grad.back() += dpred;

  VectorXd ds = VectorXd::Zero(H);
  for (std::size_t t = traces.size(); t-- > 0;) {
    const auto& tr = traces[t];
    const VectorXd h_prev = t ? traces[t - 1].hidden : VectorXd::Zero(H);
    const VectorXd s_prev = t ? traces[t - 1].cell : VectorXd::Zero(H);
    const VectorXd x = scalar(win.inputs[t]);

    const VectorXd d_output = dh.cwiseProduct(tr.tanh_cell);
    ds += dh.cwiseProduct(tr.output).cwiseProduct((1.0 - tr.tanh_cell.array().square()).matrix());
    const VectorXd d_forget = ds.cwiseProduct(s_prev);
    const VectorXd d_input = ds.cwiseProduct(tr.candidate);
    const VectorXd d_candidate = ds.cwiseProduct(tr.input);
    const VectorXd ds_prev = ds.cwiseProduct(tr.forget);

    const VectorXd a_forget = d_forget.array() * tr.forget.array() * (1.0 - tr.forget.array());
    const VectorXd a_input = d_input.array() * tr.input.array() * (1.0 - tr.input.array());
    const VectorXd a_candidate = d_candidate.array() * (1.0 - tr.candidate.array().square());
    const VectorXd a_output = d_output.array() * tr.output.array() * (1.0 - tr.output.array());

    VectorXd dh_prev = VectorXd::Zero(H);
    const std::pair<const VectorXd*, std::pair<LstmGate*, const LstmGate*>> gates[] = {
        {&a_forget, {&grad->forget, &p.forget}},
        {&a_input, {&grad->input, &p.input}},
        {&a_candidate, {&grad->candidate, &p.candidate}},
        {&a_output, {&grad->output, &p.output}},
    };
    for (const auto& [da, gg] : gates) {
      gg.first->input_weights.noalias() += *da * x.transpose();
      gg.first->recurrent_weights.noalias() += *da * h_prev.transpose();
      gg.first->bias += *da;
      dh_prev.noalias() += gg.second->recurrent_weights.transpose() * *da;
    }
    dh = dh_prev;
    ds = ds_prev;
  }
  return err * err;
}

double gru_window(const RecurrentModel& model, const GruParams& p, const TrainingWindow& win, double weight,
                  GruParams* grad, std::span<double> head_grad) {
  const auto H = model.hidden_size;
  std::vector<GruTrace> traces;
  traces.reserve(win.inputs.size());
  VectorXd h = VectorXd::Zero(H);
  for (double x : win.inputs) {
    traces.push_back(gru_trace(p, scalar(x), h));
    h = traces.back().hidden;
  }
  const double err = head(model, h) - win.target;
  if (!grad) return err * err;

  const double dpred = 2.0 * err * weight;
  const auto w = head_weights(model);
  VectorXd dh(H);
  for (Eigen::Index k = 0; k < H; ++k) {
    head_grad[static_cast<std::size_t>(k)] += dpred * h(k);
    dh(k) = dpred * w[static_cast<std::size_t>(k)];
  }
  head_grad.back() += dpred;

  for (std::size_t t = traces.size(); t-- > 0;) {
    const auto& tr = traces[t];
    const VectorXd h_prev = tr.joint.head(H);

    const VectorXd d_update = dh.cwiseProduct(h_prev - tr.candidate);
    const VectorXd d_candidate = dh.cwiseProduct((1.0 - tr.update.array()).matrix());
    VectorXd dh_prev = dh.cwiseProduct(tr.update);

    const VectorXd a_candidate = d_candidate.array() * (1.0 - tr.candidate.array().square());
    grad->candidate.weights.noalias() += a_candidate * tr.reset_joint.transpose();
    grad->candidate.bias += a_candidate;
    const VectorXd d_reset_joint = p.candidate.weights.transpose() * a_candidate;
    const VectorXd d_reset_h = d_reset_joint.head(H);
    const VectorXd d_reset = d_reset_h.cwiseProduct(h_prev);
    dh_prev += d_reset_h.cwiseProduct(tr.reset);

    const VectorXd a_update = d_update.array() * tr.update.array() * (1.0 - tr.update.array());
    grad->update.weights.noalias() += a_update * tr.joint.transpose();
    grad->update.bias += a_update;
    dh_prev += (p.update.weights.transpose() * a_update).head(H);

    const VectorXd a_reset = d_reset.array() * tr.reset.array() * (1.0 - tr.reset.array());
    grad->reset.weights.noalias() += a_reset * tr.joint.transpose();
    grad->reset.bias += a_reset;
    dh_prev += (p.reset.weights.transpose() * a_reset).head(H);

    dh = dh_prev;
  }
  return err * err;
}

void check_windows(const RecurrentModel& model, std::span<const TrainingWindow> batch) {
  if (batch.empty()) throw Error(Errc::EmptyInput, "empty training batch");
  for (const auto& win : batch) {
    if (win.inputs.size() != static_cast<std::size_t>(model.window)) {
      throw Error(Errc::ShapeMismatch, "window of length " + std::to_string(win.inputs.size()) + ", model expects " +
                                           std::to_string(model.window));
    }
  }
}

}  // namespace

LstmParams LstmParams::zeros(int input_size, int hidden_size) {
  return {zero_gate(input_size, hidden_size), zero_gate(input_size, hidden_size), zero_gate(input_size, hidden_size),
          zero_gate(input_size, hidden_size)};
}

GruParams GruParams::zeros(int input_size, int hidden_size) {
  return {zero_gru_gate(input_size, hidden_size), zero_gru_gate(input_size, hidden_size),
          zero_gru_gate(input_size, hidden_size)};
}

LstmState lstm_step(const LstmParams& params, const VectorXd& x, const LstmState& state) {
  check_lstm_shapes(params, x, state);
  auto t = lstm_trace(params, x, state.hidden, state.cell);
  return {std::move(t.hidden), std::move(t.cell)};
}

VectorXd gru_step(const GruParams& params, const VectorXd& x, const VectorXd& hidden) {
  check_gru_shapes(params, x, hidden);
  return gru_trace(params, x, hidden).hidden;
}

std::size_t param_count(CellKind kind, int input_size, int hidden_size) {
  const auto I = static_cast<std::size_t>(input_size);
  const auto H = static_cast<std::size_t>(hidden_size);
  const std::size_t per_gate = H * I + H * H + H;
  return (kind == CellKind::Lstm ? 4 : 3) * per_gate;
}

Normalization Normalization::fit(std::span<const double> values) {
  if (values.empty()) throw Error(Errc::EmptyInput, "normalization of an empty set");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return {*lo, *hi};
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(Errc::InvalidConfig, what); };
  if (epochs < 0) fail("epochs must be non-negative");
  if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) fail("Adam betas must be in [0, 1)");
  if (!(adam_epsilon > 0.0)) fail("adam_epsilon must be positive");
  if (hidden_size < 1) fail("hidden_size must be positive");
  if (window < 1) fail("window must be positive");
  if (!(clip_norm > 0.0)) fail("clip_norm must be positive");
}

RecurrentModel RecurrentModel::zeros(CellKind kind, int hidden_size, int window) {
  RecurrentModel m;
  m.kind = kind;
  m.hidden_size = hidden_size;
  m.window = window;
  m.weights.assign(m.n_weights(), 0.0);
  return m;
}

LstmParams RecurrentModel::lstm() const {
  if (kind != CellKind::Lstm) throw Error(Errc::ShapeMismatch, "not an LSTM model");
  check_model(*this);
  return unpack_lstm(weights, input_size, hidden_size);
}

GruParams RecurrentModel::gru() const {
  if (kind != CellKind::Gru) throw Error(Errc::ShapeMismatch, "not a GRU model");
  check_model(*this);
  return unpack_gru(weights, input_size, hidden_size);
}

std::vector<double> pack(const LstmParams& params) {
  std::vector<double> out;
  for (const auto* g : {&params.forget, &params.input, &params.candidate, &params.output}) {
    append(out, g->input_weights);
    append(out, g->recurrent_weights);
    append(out, g->bias);
  }
  return out;
}

std::vector<double> pack(const GruParams& params) {
  std::vector<double> out;
  for (const auto* g : {&params.update, &params.reset, &params.candidate}) {
    append(out, g->weights);
    append(out, g->bias);
  }
  return out;
}

std::vector<TrainingWindow> sliding_windows(std::span<const double> normalized, int window) {
  std::vector<TrainingWindow> out;
  const auto w = static_cast<std::size_t>(window);
  for (std::size_t t = w; t < normalized.size(); ++t) {
    out.push_back({{normalized.begin() + static_cast<std::ptrdiff_t>(t - w),
                    normalized.begin() + static_cast<std::ptrdiff_t>(t)},
                   normalized[t]});
  }
  return out;
}

double forward(const RecurrentModel& model, std::span<const double> window) {
  check_model(model);
  if (window.size() != static_cast<std::size_t>(model.window)) {
    throw Error(Errc::ShapeMismatch, "window of length " + std::to_string(window.size()) + ", model expects " +
                                         std::to_string(model.window));
  }
  const auto H = model.hidden_size;
  if (model.kind == CellKind::Lstm) {
    const auto p = model.lstm();
    LstmState state{VectorXd::Zero(H), VectorXd::Zero(H)};
    for (double x : window) state = lstm_step(p, scalar(x), state);
    return head(model, state.hidden);
  }
  const auto p = model.gru();
  VectorXd h = VectorXd::Zero(H);
  for (double x : window) h = gru_step(p, scalar(x), h);
  return head(model, h);
}

double batch_loss(const RecurrentModel& model, std::span<const TrainingWindow> batch) {
  check_model(model);
  check_windows(model, batch);
  double total = 0.0;
  if (model.kind == CellKind::Lstm) {
    const auto p = model.lstm();
    for (const auto& win : batch) total += lstm_window(model, p, win, 0.0, nullptr, {});
  } else {
    const auto p = model.gru();
    for (const auto& win : batch) total += gru_window(model, p, win, 0.0, nullptr, {});
  }
  return total / static_cast<double>(batch.size());
}

LossGradient loss_gradient(const RecurrentModel& model, std::span<const TrainingWindow> batch) {
  check_model(model);
  check_windows(model, batch);
  const double weight = 1.0 / static_cast<double>(batch.size());
  const auto H = model.hidden_size;
  std::vector<double> head_grad(static_cast<std::size_t>(H) + 1, 0.0);
  LossGradient out;
  double total = 0.0;
  if (model.kind == CellKind::Lstm) {
    const auto p = model.lstm();
    auto grad = LstmParams::zeros(model.input_size, H);
    for (const auto& win : batch) total += lstm_window(model, p, win, weight, &grad, head_grad);
    out.gradient = pack(grad);
  } else {
    const auto p = model.gru();
    auto grad = GruParams::zeros(model.input_size, H);
    for (const auto& win : batch) total += gru_window(model, p, win, weight, &grad, head_grad);
    out.gradient = pack(grad);
  }
  out.gradient.insert(out.gradient.end(), head_grad.begin(), head_grad.end());
  out.loss = total * weight;
  return out;
}

double central_difference(const std::function<double(double)>& f, double x, double h) {
  if (!(h > 0.0)) throw Error(Errc::InvalidConfig, "finite-difference step must be positive");
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

double numeric_gradient(const RecurrentModel& model, std::span<const TrainingWindow> batch, std::size_t coordinate,
                        double h) {
  check_model(model);
  if (coordinate >= model.weights.size()) throw Error(Errc::ShapeMismatch, "coordinate out of range");
  RecurrentModel probe = model;
  return central_difference(
      [&](double theta) {
        probe.weights[coordinate] = theta;
        return batch_loss(probe, batch);
      },
      model.weights[coordinate], h);
}

RecurrentModel train(std::span<const std::vector<double>> series_set, CellKind kind, const TrainConfig& config) {
  config.validate();
  if (series_set.empty()) throw Error(Errc::EmptyInput, "no training series");
  std::vector<double> pooled;
  for (const auto& s : series_set) {
    if (s.size() <= static_cast<std::size_t>(config.window)) {
      throw Error(Errc::InsufficientHistory, "training series of length " + std::to_string(s.size()) +
                                                 " needs more than " + std::to_string(config.window) + " values");
    }
    pooled.insert(pooled.end(), s.begin(), s.end());
  }

  RecurrentModel model = RecurrentModel::zeros(kind, config.hidden_size, config.window);
  model.seed = config.seed;
  model.norm = Normalization::fit(pooled);

  std::vector<TrainingWindow> batch;
  for (const auto& s : series_set) {
    std::vector<double> normalized(s.size());
    std::transform(s.begin(), s.end(), normalized.begin(), [&](double v) { return model.norm.normalize(v); });
    auto windows = sliding_windows(normalized, config.window);
    batch.insert(batch.end(), std::make_move_iterator(windows.begin()), std::make_move_iterator(windows.end()));
  }

  std::mt19937_64 rng(config.seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(config.hidden_size));
  std::uniform_real_distribution<double> init(-bound, bound);
  for (auto& w : model.weights) w = init(rng);

  struct Moments {
    std::vector<double> m, v;
    double beta1_power = 1.0;
    double beta2_power = 1.0;
  };
  Moments adam{std::vector<double>(model.weights.size(), 0.0), std::vector<double>(model.weights.size(), 0.0)};

  // A step that raises the loss is undone, momentum is cleared and the step
  // size halves; accepted steps let it recover towards the configured rate.
  Moments saved_adam;
  std::vector<double> saved_weights;
  LossGradient saved;
  double step_scale = 1.0;
  model.train_log.reserve(static_cast<std::size_t>(config.epochs));
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    LossGradient eval = loss_gradient(model, batch);
    if (epoch == 0) {
      if (!std::isfinite(eval.loss)) throw Error(Errc::DivergedLoss, "initial loss is non-finite");
    } else if (!(eval.loss <= saved.loss)) {
      model.weights = saved_weights;
      adam = saved_adam;
      std::fill(adam.m.begin(), adam.m.end(), 0.0);
      eval = saved;
      step_scale *= 0.5;
    } else {
      step_scale = std::min(1.0, step_scale * 1.1);
    }
    model.train_log.push_back(eval.loss);
    saved_weights = model.weights;
    saved_adam = adam;
    saved = eval;

    double norm2 = 0.0;
    for (double g : eval.gradient) norm2 += g * g;
    const double norm = std::sqrt(norm2);
    const double clip = norm > config.clip_norm ? config.clip_norm / norm : 1.0;
    const double rate = config.learning_rate * step_scale;

    adam.beta1_power *= config.beta1;
    adam.beta2_power *= config.beta2;
    for (std::size_t k = 0; k < eval.gradient.size(); ++k) {
      const double g = eval.gradient[k] * clip;
      adam.m[k] = config.beta1 * adam.m[k] + (1.0 - config.beta1) * g;
      adam.v[k] = config.beta2 * adam.v[k] + (1.0 - config.beta2) * g * g;
      const double m_hat = adam.m[k] / (1.0 - adam.beta1_power);
      const double v_hat = adam.v[k] / (1.0 - adam.beta2_power);
      model.weights[k] -= rate * m_hat / (std::sqrt(v_hat) + config.adam_epsilon);
    }
  }
  // The last step is never evaluated; keep the best weights seen.
  if (!saved_weights.empty() && !(batch_loss(model, batch) <= saved.loss)) model.weights = saved_weights;
  for (double w : model.weights) {
    if (!std::isfinite(w)) throw Error(Errc::DivergedLoss, "weights became non-finite");
  }
  return model;
}

std::vector<double> predict(const RecurrentModel& model, std::span<const double> history, std::size_t horizon) {
  if (horizon == 0) return {};
  const auto w = static_cast<std::size_t>(model.window);
  if (history.size() < w) {
    throw Error(Errc::InsufficientHistory, "prediction needs " + std::to_string(w) + " observations, got " +
                                               std::to_string(history.size()));
  }
  std::vector<double> context;
  context.reserve(w + horizon);
  for (std::size_t k = history.size() - w; k < history.size(); ++k) context.push_back(model.norm.normalize(history[k]));
  std::vector<double> out;
  out.reserve(horizon);
  for (std::size_t h = 0; h < horizon; ++h) {
    const double y = forward(model, std::span<const double>(context).subspan(h, w));
    context.push_back(y);
    out.push_back(std::max(0.0, model.norm.denormalize(y)));
  }
  return out;
}

std::string to_json(const RecurrentModel& model) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(model.kind);
  j["input_size"] = model.input_size;
  j["hidden_size"] = model.hidden_size;
  j["window"] = model.window;
  j["layout"] = model.kind == CellKind::Lstm ? "gates f,i,g,o: W_x (row-major), W_h (row-major), b; head: w, b"
                                             : "gates u,r,h: W over (h, x) (row-major), b; head: w, b";
  j["weights"] = model.weights;
  j["norm"] = {{"min", model.norm.min}, {"max", model.norm.max}};
  j["seed"] = model.seed;
  j["train_log"] = model.train_log;
  return j.dump();
}

RecurrentModel recurrent_model_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    RecurrentModel m;
    m.kind = parse_cell_kind(j.at("kind").get<std::string>());
    m.input_size = j.at("input_size").get<int>();
    m.hidden_size = j.at("hidden_size").get<int>();
    m.window = j.at("window").get<int>();
    m.weights = j.at("weights").get<std::vector<double>>();
    m.norm = {j.at("norm").at("min").get<double>(), j.at("norm").at("max").get<double>()};
    m.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("train_log")) m.train_log = j.at("train_log").get<std::vector<double>>();
    check_model(m);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ConfigError, std::string("model JSON: ") + e.what());
  }
}

}  // namespace hydrocast
