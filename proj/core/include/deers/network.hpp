#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "deers/gru.hpp"

namespace deers {

// Q-network variants:
//   deers    dual-stream network over (s+, s-, a) with pairwise regularizer
//   deers-p  positive-only baseline; s- never influences the output
//   deers-f  one fully connected stack of the same total depth over s+ ++ s- ++ a
//   deers-t  dual-stream but raw concatenated window embeddings, no GRU
//   deers-r  deers with the regularizer weight forced to zero
enum class QVariant { kDeers, kDeersP, kDeersF, kDeersT, kDeersR };

const char* to_string(QVariant v);
QVariant variant_from_string(const std::string& s);

bool variant_uses_gru(QVariant v);
bool variant_uses_negative(QVariant v);

struct Dense {
  Eigen::MatrixXd W;  // out x in
  Eigen::VectorXd b;
};

struct NetworkDims {
  int embed_dim = 50;
  int hidden_dim = 50;  // GRU state size
  int window = 10;      // N items per state window
  // Three separated layers per stream, then the joint stack; hidden layers
  // are ReLU, the output layer is linear.
  std::vector<int> stream_widths = {64, 32, 16};
  std::vector<int> joint_hidden = {16};
  int output_dim = 1;  // 1 for Q-networks, 3 for the feedback simulator

  int encoding_width(QVariant v) const;
  void validate() const;
  bool operator==(const NetworkDims&) const = default;
};

struct NetworkParameters {
  NetworkDims dims;
  std::optional<GruCell> pos_encoder, neg_encoder;
  std::vector<Dense> pos_stream, neg_stream;
  std::vector<Dense> joint;
};

// Flat view over every parameter array, in canonical (checkpoint) order.
struct ArrayView {
  std::string name;
  double* data;
  std::size_t rows, cols;  // cols == 1 for bias vectors
  std::size_t size() const { return rows * cols; }
};
struct ConstArrayView {
  std::string name;
  const double* data;
  std::size_t rows, cols;
  std::size_t size() const { return rows * cols; }
};
std::vector<ArrayView> array_views(NetworkParameters& p);
std::vector<ConstArrayView> array_views(const NetworkParameters& p);

NetworkParameters zeros_like(const NetworkParameters& p);
std::size_t parameter_count(const NetworkParameters& p);
double global_norm(const NetworkParameters& p);
bool all_finite(const NetworkParameters& p);
// dst += a * x (identical structure required)
void axpy(NetworkParameters& dst, double a, const NetworkParameters& x);

// Glorot-uniform weights, zero biases, deterministic in seed.
NetworkParameters init_network(QVariant variant, const NetworkDims& dims, std::uint64_t seed);

// State-window encodings feeding the dense trunk. For GRU variants these are
// the final hidden states; for deers-t the concatenated window embeddings.
struct StateEncoding {
  Eigen::VectorXd pos, neg;
  GruTrace pos_trace, neg_trace;
  bool traced = false;
};

StateEncoding encode_state(const NetworkParameters& p, QVariant v, const DualState& state,
                           const Catalog& catalog, bool keep_traces);

struct DenseTrace {
  Eigen::VectorXd in, pre;
};
struct TrunkTrace {
  std::vector<DenseTrace> pos, neg, joint;
};

// Dense trunk on top of the encodings for a single action embedding.
Eigen::VectorXd trunk_forward(const NetworkParameters& p, QVariant v, const StateEncoding& enc,
                              const Eigen::VectorXd& action_embedding,
                              TrunkTrace* trace = nullptr);

// Same trunk over many actions at once; column j of the result corresponds to
// actions column j. Used for candidate scoring.
Eigen::MatrixXd trunk_forward_many(const NetworkParameters& p, QVariant v,
                                   const StateEncoding& enc,
                                   const Eigen::MatrixXd& action_embeddings);

// Backward through the trunk for one action pass. Accumulates parameter
// gradients into grad and d(loss)/d(encoding) into d_enc_pos / d_enc_neg;
// gradients w.r.t. the action embedding are discarded (embeddings frozen).
void trunk_backward(const NetworkParameters& p, QVariant v, const TrunkTrace& trace,
                    const Eigen::VectorXd& dout, NetworkParameters& grad,
                    Eigen::VectorXd& d_enc_pos, Eigen::VectorXd& d_enc_neg);

// Backward through the window encoders given accumulated encoding gradients.
// No-op for deers-t (raw embeddings are not trainable).
void encoder_backward(const NetworkParameters& p, QVariant v, const StateEncoding& enc,
                      const Eigen::VectorXd& d_enc_pos, const Eigen::VectorXd& d_enc_neg,
                      NetworkParameters& grad);

}  // namespace deers
