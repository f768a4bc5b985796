#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "deers/catalog.hpp"
#include "deers/session.hpp"

namespace deers {

// One gated recurrent unit, iterated over a window with h_0 = 0:
//   z_n = sigmoid(Wz x_n + Uz h_{n-1})          (update gate)
//   r_n = sigmoid(Wr x_n + Ur h_{n-1})          (reset gate)
//   c_n = tanh(W x_n + U (r_n o h_{n-1}))       (candidate state)
//   h_n = (1 - z_n) o h_{n-1} + z_n o c_n
// The final hidden state h_N is the window representation.
struct GruCell {
  Eigen::MatrixXd Wz, Uz, Wr, Ur, W, U;  // W*: h x d, U*: h x h

  int hidden() const { return static_cast<int>(Wz.rows()); }
  int input() const { return static_cast<int>(Wz.cols()); }
  static GruCell zeros(int hidden, int input);
  void check_shapes() const;
};

// Positive- and negative-window encoders; parameters are untied.
struct EncoderParameters {
  GruCell positive;
  GruCell negative;
};

// Per-step values kept for backpropagation through time.
struct GruTrace {
  std::vector<Eigen::VectorXd> x;      // inputs x_1..x_N
  std::vector<Eigen::VectorXd> h;      // h_0..h_N
  std::vector<Eigen::VectorXd> z, r, c;
};

Eigen::VectorXd gru_forward(const GruCell& cell, const std::vector<Eigen::VectorXd>& inputs,
                            GruTrace* trace = nullptr);

// Accumulates d(loss)/d(parameters) into grad for a loss gradient dh_last at
// the final hidden state. Input gradients are not produced: item embeddings
// are frozen after pre-training.
void gru_backward(const GruCell& cell, const GruTrace& trace, const Eigen::VectorXd& dh_last,
                  GruCell& grad);

// Encodes an item window by resolving embeddings (padding -> zero) and
// running the cell.
Eigen::VectorXd encode_gru(const GruCell& cell, const std::vector<ItemId>& window,
                           const Catalog& catalog, GruTrace* trace = nullptr);

// (s+, s-) encodings of a dual state under the two encoders.
std::pair<Eigen::VectorXd, Eigen::VectorXd> state_vector(const DualState& state,
                                                         const EncoderParameters& params,
                                                         const Catalog& catalog);

}  // namespace deers
