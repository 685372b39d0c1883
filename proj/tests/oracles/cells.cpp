#include "oracles/cells.hpp"

#include <cmath>

namespace oracle {

namespace {

double sigma(double a) { return 1.0 / (1.0 + std::exp(-a)); }

double row_dot(const Vector& row, const Vector& v, std::size_t offset = 0) {
  double sum = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) sum += row[offset + k] * v[k];
  return sum;
}

}  // namespace

std::pair<Vector, Vector> lstm_step(const Lstm& p, const Vector& x, const Vector& h_prev, const Vector& s_prev) {
  const std::size_t H = p.bf.size();
  Vector h(H), s(H);
  for (std::size_t j = 0; j < H; ++j) {
    const double f = sigma(row_dot(p.Wfx[j], x) + row_dot(p.Wfh[j], h_prev) + p.bf[j]);
    const double i = sigma(row_dot(p.Wix[j], x) + row_dot(p.Wih[j], h_prev) + p.bi[j]);
    const double g = std::tanh(row_dot(p.Wgx[j], x) + row_dot(p.Wgh[j], h_prev) + p.bg[j]);
    const double o = sigma(row_dot(p.Wox[j], x) + row_dot(p.Woh[j], h_prev) + p.bo[j]);
    s[j] = g * i + s_prev[j] * f;
    h[j] = std::tanh(s[j]) * o;
  }
  return {h, s};
}

Vector gru_step(const Gru& p, const Vector& x, const Vector& h_prev) {
  const std::size_t H = p.bu.size();
  Vector u(H), r(H), rh(H), h(H);
  for (std::size_t j = 0; j < H; ++j) {
    u[j] = sigma(row_dot(p.Wu[j], h_prev) + row_dot(p.Wu[j], x, H) + p.bu[j]);
    r[j] = sigma(row_dot(p.Wr[j], h_prev) + row_dot(p.Wr[j], x, H) + p.br[j]);
  }
  for (std::size_t j = 0; j < H; ++j) rh[j] = r[j] * h_prev[j];
  for (std::size_t j = 0; j < H; ++j) {
    const double candidate = std::tanh(row_dot(p.Wh[j], rh) + row_dot(p.Wh[j], x, H) + p.bh[j]);
    h[j] = u[j] * h_prev[j] + (1.0 - u[j]) * candidate;
  }
  return h;
}

}  // namespace oracle
