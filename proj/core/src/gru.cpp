#include "deers/gru.hpp"

#include <fmt/format.h>

namespace deers {

GruCell GruCell::zeros(int hidden, int input) {
  GruCell c;
  c.Wz = Eigen::MatrixXd::Zero(hidden, input);
  c.Uz = Eigen::MatrixXd::Zero(hidden, hidden);
  c.Wr = Eigen::MatrixXd::Zero(hidden, input);
  c.Ur = Eigen::MatrixXd::Zero(hidden, hidden);
  c.W = Eigen::MatrixXd::Zero(hidden, input);
  c.U = Eigen::MatrixXd::Zero(hidden, hidden);
  return c;
}

void GruCell::check_shapes() const {
  const auto h = Wz.rows();
  const auto d = Wz.cols();
  if (Wr.rows() != h || Wr.cols() != d || W.rows() != h || W.cols() != d ||
      Uz.rows() != h || Uz.cols() != h || Ur.rows() != h || Ur.cols() != h ||
      U.rows() != h || U.cols() != h)
    throw ConfigError(fmt::format("gru: inconsistent parameter shapes (h={}, d={})", h, d));
}

namespace {

Eigen::ArrayXd sigmoid(const Eigen::VectorXd& v) {
  return 1.0 / (1.0 + (-v.array()).exp());
}

}  // namespace

Eigen::VectorXd gru_forward(const GruCell& cell, const std::vector<Eigen::VectorXd>& inputs,
                            GruTrace* trace) {
  cell.check_shapes();
  const int hidden = cell.hidden();
  Eigen::VectorXd h = Eigen::VectorXd::Zero(hidden);
  if (trace) {
    trace->x = inputs;
    trace->h.assign(1, h);
    trace->z.clear();
    trace->r.clear();
    trace->c.clear();
  }
  for (const auto& x : inputs) {
    if (x.size() != cell.input())
      throw ConfigError(fmt::format("gru: input length {} != expected {}", x.size(),
                                    cell.input()));
    const Eigen::VectorXd z = sigmoid(cell.Wz * x + cell.Uz * h);
    const Eigen::VectorXd r = sigmoid(cell.Wr * x + cell.Ur * h);
    const Eigen::VectorXd c =
        (cell.W * x + cell.U * (r.array() * h.array()).matrix()).array().tanh();
    h = ((1.0 - z.array()) * h.array() + z.array() * c.array()).matrix();
    if (trace) {
      trace->z.push_back(z);
      trace->r.push_back(r);
      trace->c.push_back(c);
      trace->h.push_back(h);
    }
  }
  return h;
}

void gru_backward(const GruCell& cell, const GruTrace& trace, const Eigen::VectorXd& dh_last,
                  GruCell& grad) {
  const int steps = static_cast<int>(trace.x.size());
  Eigen::VectorXd dh = dh_last;
  for (int n = steps - 1; n >= 0; --n) {
    const auto& x = trace.x[n];
    const auto& h_prev = trace.h[n];
    const auto& z = trace.z[n];
    const auto& r = trace.r[n];
    const auto& c = trace.c[n];

    // h_n = (1 - z) o h_{n-1} + z o c
    const Eigen::VectorXd dz = (dh.array() * (c.array() - h_prev.array())).matrix();
    const Eigen::VectorXd dc = (dh.array() * z.array()).matrix();
    Eigen::VectorXd dh_prev = (dh.array() * (1.0 - z.array())).matrix();

    // candidate: c = tanh(W x + U (r o h_{n-1}))
    const Eigen::VectorXd dc_pre = (dc.array() * (1.0 - c.array().square())).matrix();
    grad.W.noalias() += dc_pre * x.transpose();
    grad.U.noalias() += dc_pre * (r.array() * h_prev.array()).matrix().transpose();
    const Eigen::VectorXd dgated = cell.U.transpose() * dc_pre;
    const Eigen::VectorXd dr = (dgated.array() * h_prev.array()).matrix();
    dh_prev.array() += dgated.array() * r.array();

    // gates
    const Eigen::VectorXd dz_pre = (dz.array() * z.array() * (1.0 - z.array())).matrix();
    grad.Wz.noalias() += dz_pre * x.transpose();
    grad.Uz.noalias() += dz_pre * h_prev.transpose();
    dh_prev.noalias() += cell.Uz.transpose() * dz_pre;

    const Eigen::VectorXd dr_pre = (dr.array() * r.array() * (1.0 - r.array())).matrix();
    grad.Wr.noalias() += dr_pre * x.transpose();
    grad.Ur.noalias() += dr_pre * h_prev.transpose();
    dh_prev.noalias() += cell.Ur.transpose() * dr_pre;

    dh = std::move(dh_prev);
  }
}

Eigen::VectorXd encode_gru(const GruCell& cell, const std::vector<ItemId>& window,
                           const Catalog& catalog, GruTrace* trace) {
  std::vector<Eigen::VectorXd> inputs;
  inputs.reserve(window.size());
  for (ItemId id : window) inputs.push_back(catalog.embedding(id));
  return gru_forward(cell, inputs, trace);
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> state_vector(const DualState& state,
                                                         const EncoderParameters& params,
                                                         const Catalog& catalog) {
  return {encode_gru(params.positive, state.positive, catalog),
          encode_gru(params.negative, state.negative, catalog)};
}

}  // namespace deers
