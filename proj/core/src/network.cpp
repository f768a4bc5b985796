#include "deers/network.hpp"

#include <fmt/format.h>

#include <cmath>
#include <random>

namespace deers {

const char* to_string(QVariant v) {
  switch (v) {
    case QVariant::kDeers:
      return "deers";
    case QVariant::kDeersP:
      return "deers-p";
    case QVariant::kDeersF:
      return "deers-f";
    case QVariant::kDeersT:
      return "deers-t";
    case QVariant::kDeersR:
      return "deers-r";
  }
  throw ConfigError("unknown variant value");
}

QVariant variant_from_string(const std::string& s) {
  if (s == "deers") return QVariant::kDeers;
  if (s == "deers-p") return QVariant::kDeersP;
  if (s == "deers-f") return QVariant::kDeersF;
  if (s == "deers-t") return QVariant::kDeersT;
  if (s == "deers-r") return QVariant::kDeersR;
  throw ConfigError(fmt::format("unknown variant '{}'", s));
}

bool variant_uses_gru(QVariant v) { return v != QVariant::kDeersT; }
bool variant_uses_negative(QVariant v) { return v != QVariant::kDeersP; }

int NetworkDims::encoding_width(QVariant v) const {
  return variant_uses_gru(v) ? hidden_dim : window * embed_dim;
}

void NetworkDims::validate() const {
  if (embed_dim < 1 || hidden_dim < 1 || window < 1 || output_dim < 1)
    throw ConfigError("network dims must be positive");
  if (stream_widths.empty() || joint_hidden.empty())
    throw ConfigError("stream and joint layer lists must be nonempty");
  for (int w : stream_widths)
    if (w < 1) throw ConfigError("stream widths must be positive");
  for (int w : joint_hidden)
    if (w < 1) throw ConfigError("joint widths must be positive");
}

namespace {

template <typename Params, typename View>
std::vector<View> collect_views(Params& p) {
  std::vector<View> out;
  auto add_matrix = [&](const std::string& name, auto& m) {
    out.push_back(View{name, m.data(), static_cast<std::size_t>(m.rows()),
                       static_cast<std::size_t>(m.cols())});
  };
  auto add_cell = [&](const std::string& prefix, auto& cell) {
    add_matrix(prefix + "/Wz", cell.Wz);
    add_matrix(prefix + "/Uz", cell.Uz);
    add_matrix(prefix + "/Wr", cell.Wr);
    add_matrix(prefix + "/Ur", cell.Ur);
    add_matrix(prefix + "/W", cell.W);
    add_matrix(prefix + "/U", cell.U);
  };
  auto add_stack = [&](const std::string& prefix, auto& stack) {
    for (std::size_t i = 0; i < stack.size(); ++i) {
      add_matrix(fmt::format("{}/{}/W", prefix, i), stack[i].W);
      add_matrix(fmt::format("{}/{}/b", prefix, i), stack[i].b);
    }
  };
  if (p.pos_encoder) add_cell("enc_pos", *p.pos_encoder);
  if (p.neg_encoder) add_cell("enc_neg", *p.neg_encoder);
  add_stack("stream_pos", p.pos_stream);
  add_stack("stream_neg", p.neg_stream);
  add_stack("joint", p.joint);
  return out;
}

}  // namespace

std::vector<ArrayView> array_views(NetworkParameters& p) {
  return collect_views<NetworkParameters, ArrayView>(p);
}

std::vector<ConstArrayView> array_views(const NetworkParameters& p) {
  return collect_views<const NetworkParameters, ConstArrayView>(p);
}

NetworkParameters zeros_like(const NetworkParameters& p) {
  NetworkParameters z = p;
  for (auto& v : array_views(z)) std::fill(v.data, v.data + v.size(), 0.0);
  return z;
}

std::size_t parameter_count(const NetworkParameters& p) {
  std::size_t n = 0;
  for (const auto& v : array_views(p)) n += v.size();
  return n;
}

double global_norm(const NetworkParameters& p) {
  double sq = 0.0;
  for (const auto& v : array_views(p))
    for (std::size_t i = 0; i < v.size(); ++i) sq += v.data[i] * v.data[i];
  return std::sqrt(sq);
}

bool all_finite(const NetworkParameters& p) {
  for (const auto& v : array_views(p))
    for (std::size_t i = 0; i < v.size(); ++i)
      if (!std::isfinite(v.data[i])) return false;
  return true;
}

void axpy(NetworkParameters& dst, double a, const NetworkParameters& x) {
  auto dv = array_views(dst);
  auto xv = array_views(x);
  if (dv.size() != xv.size()) throw ConfigError("axpy: mismatched parameter structure");
  for (std::size_t k = 0; k < dv.size(); ++k) {
    if (dv[k].name != xv[k].name || dv[k].rows != xv[k].rows || dv[k].cols != xv[k].cols)
      throw ConfigError(fmt::format("axpy: mismatched array '{}'", dv[k].name));
    for (std::size_t i = 0; i < dv[k].size(); ++i) dv[k].data[i] += a * xv[k].data[i];
  }
}

namespace {

Dense make_dense(int out, int in) {
  Dense d;
  d.W = Eigen::MatrixXd::Zero(out, in);
  d.b = Eigen::VectorXd::Zero(out);
  return d;
}

std::vector<Dense> make_stack(int input, const std::vector<int>& widths) {
  std::vector<Dense> stack;
  int in = input;
  for (int w : widths) {
    stack.push_back(make_dense(w, in));
    in = w;
  }
  return stack;
}

}  // namespace

NetworkParameters init_network(QVariant variant, const NetworkDims& dims, std::uint64_t seed) {
  dims.validate();
  NetworkParameters p;
  p.dims = dims;

  const int enc = dims.encoding_width(variant);
  const int stream_in = enc + dims.embed_dim;
  const int stream_out = dims.stream_widths.back();

  if (variant_uses_gru(variant)) {
    p.pos_encoder = GruCell::zeros(dims.hidden_dim, dims.embed_dim);
    if (variant_uses_negative(variant))
      p.neg_encoder = GruCell::zeros(dims.hidden_dim, dims.embed_dim);
  }

  std::vector<int> joint_widths = dims.joint_hidden;
  joint_widths.push_back(dims.output_dim);

  switch (variant) {
    case QVariant::kDeers:
    case QVariant::kDeersR:
    case QVariant::kDeersT:
      p.pos_stream = make_stack(stream_in, dims.stream_widths);
      p.neg_stream = make_stack(stream_in, dims.stream_widths);
      p.joint = make_stack(2 * stream_out, joint_widths);
      break;
    case QVariant::kDeersP:
      p.pos_stream = make_stack(stream_in, dims.stream_widths);
      p.joint = make_stack(stream_out, joint_widths);
      break;
    case QVariant::kDeersF: {
      // one stack of the same total depth over [s+ enc, s- enc, action]
      std::vector<int> widths = dims.stream_widths;
      widths.insert(widths.end(), joint_widths.begin(), joint_widths.end());
      p.joint = make_stack(2 * enc + dims.embed_dim, widths);
      break;
    }
  }

  std::mt19937_64 rng(derive_seed(seed, 0x11e7u));
  for (auto& view : array_views(p)) {
    if (view.name.ends_with("/b")) continue;  // biases stay zero
    const double limit = std::sqrt(6.0 / static_cast<double>(view.rows + view.cols));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (std::size_t i = 0; i < view.size(); ++i) view.data[i] = u(rng);
  }
  return p;
}

StateEncoding encode_state(const NetworkParameters& p, QVariant v, const DualState& state,
                           const Catalog& catalog, bool keep_traces) {
  if (static_cast<int>(state.window()) != p.dims.window ||
      static_cast<int>(state.negative.size()) != p.dims.window)
    throw ConfigError(fmt::format("state window {} does not match network window {}",
                                  state.window(), p.dims.window));
  StateEncoding enc;
  if (variant_uses_gru(v)) {
    if (!p.pos_encoder) throw ConfigError("missing positive encoder parameters");
    enc.traced = keep_traces;
    enc.pos = encode_gru(*p.pos_encoder, state.positive, catalog,
                         keep_traces ? &enc.pos_trace : nullptr);
    if (variant_uses_negative(v)) {
      if (!p.neg_encoder) throw ConfigError("missing negative encoder parameters");
      enc.neg = encode_gru(*p.neg_encoder, state.negative, catalog,
                           keep_traces ? &enc.neg_trace : nullptr);
    }
  } else {
    const int d = p.dims.embed_dim;
    enc.pos.resize(p.dims.window * d);
    enc.neg.resize(p.dims.window * d);
    for (int i = 0; i < p.dims.window; ++i) {
      enc.pos.segment(i * d, d) = catalog.embedding(state.positive[i]);
      enc.neg.segment(i * d, d) = catalog.embedding(state.negative[i]);
    }
  }
  return enc;
}

namespace {

Eigen::VectorXd stack_forward(const std::vector<Dense>& stack, Eigen::VectorXd x,
                              bool linear_last, std::vector<DenseTrace>* trace) {
  for (std::size_t l = 0; l < stack.size(); ++l) {
    if (stack[l].W.cols() != x.size())
      throw ConfigError(fmt::format("layer input length {} != expected {}", x.size(),
                                    stack[l].W.cols()));
    Eigen::VectorXd pre = stack[l].W * x + stack[l].b;
    if (trace) trace->push_back(DenseTrace{std::move(x), pre});
    const bool last = (l + 1 == stack.size());
    x = (linear_last && last) ? pre : pre.cwiseMax(0.0);
  }
  return x;
}

Eigen::MatrixXd stack_forward_many(const std::vector<Dense>& stack, Eigen::MatrixXd x,
                                   bool linear_last) {
  for (std::size_t l = 0; l < stack.size(); ++l) {
    Eigen::MatrixXd pre = (stack[l].W * x).colwise() + stack[l].b;
    const bool last = (l + 1 == stack.size());
    x = (linear_last && last) ? pre : pre.cwiseMax(0.0);
  }
  return x;
}

// Walks a stack backwards. dout is d(loss)/d(stack output). Returns
// d(loss)/d(stack input); parameter gradients accumulate into grad_stack.
Eigen::VectorXd stack_backward(const std::vector<Dense>& stack,
                               const std::vector<DenseTrace>& trace, Eigen::VectorXd dout,
                               bool linear_last, std::vector<Dense>& grad_stack) {
  for (std::size_t i = stack.size(); i-- > 0;) {
    const bool last = (i + 1 == stack.size());
    Eigen::VectorXd dpre =
        (linear_last && last)
            ? std::move(dout)
            : Eigen::VectorXd(
                  (dout.array() * (trace[i].pre.array() > 0.0).cast<double>()).matrix());
    grad_stack[i].W.noalias() += dpre * trace[i].in.transpose();
    grad_stack[i].b.noalias() += dpre;
    dout = stack[i].W.transpose() * dpre;
  }
  return dout;
}

Eigen::VectorXd concat(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Eigen::VectorXd out(a.size() + b.size());
  out << a, b;
  return out;
}

}  // namespace

Eigen::VectorXd trunk_forward(const NetworkParameters& p, QVariant v, const StateEncoding& enc,
                              const Eigen::VectorXd& action_embedding, TrunkTrace* trace) {
  switch (v) {
    case QVariant::kDeers:
    case QVariant::kDeersR:
    case QVariant::kDeersT: {
      Eigen::VectorXd u = stack_forward(p.pos_stream, concat(enc.pos, action_embedding), false,
                                        trace ? &trace->pos : nullptr);
      Eigen::VectorXd w = stack_forward(p.neg_stream, concat(enc.neg, action_embedding), false,
                                        trace ? &trace->neg : nullptr);
      return stack_forward(p.joint, concat(u, w), true, trace ? &trace->joint : nullptr);
    }
    case QVariant::kDeersP: {
      Eigen::VectorXd u = stack_forward(p.pos_stream, concat(enc.pos, action_embedding), false,
                                        trace ? &trace->pos : nullptr);
      return stack_forward(p.joint, std::move(u), true, trace ? &trace->joint : nullptr);
    }
    case QVariant::kDeersF: {
      Eigen::VectorXd x = concat(concat(enc.pos, enc.neg), action_embedding);
      return stack_forward(p.joint, std::move(x), true, trace ? &trace->joint : nullptr);
    }
  }
  throw ConfigError("unknown variant value");
}

Eigen::MatrixXd trunk_forward_many(const NetworkParameters& p, QVariant v,
                                   const StateEncoding& enc,
                                   const Eigen::MatrixXd& action_embeddings) {
  const Eigen::Index m = action_embeddings.cols();
  auto tile_with_actions = [&](const Eigen::VectorXd& head) {
    Eigen::MatrixXd x(head.size() + action_embeddings.rows(), m);
    x.topRows(head.size()).colwise() = head;
    x.bottomRows(action_embeddings.rows()) = action_embeddings;
    return x;
  };
  switch (v) {
    case QVariant::kDeers:
    case QVariant::kDeersR:
    case QVariant::kDeersT: {
      Eigen::MatrixXd u = stack_forward_many(p.pos_stream, tile_with_actions(enc.pos), false);
      Eigen::MatrixXd w = stack_forward_many(p.neg_stream, tile_with_actions(enc.neg), false);
      Eigen::MatrixXd j(u.rows() + w.rows(), m);
      j.topRows(u.rows()) = u;
      j.bottomRows(w.rows()) = w;
      return stack_forward_many(p.joint, std::move(j), true);
    }
    case QVariant::kDeersP:
      return stack_forward_many(
          p.joint, stack_forward_many(p.pos_stream, tile_with_actions(enc.pos), false), true);
    case QVariant::kDeersF:
      return stack_forward_many(p.joint, tile_with_actions(concat(enc.pos, enc.neg)), true);
  }
  throw ConfigError("unknown variant value");
}

void trunk_backward(const NetworkParameters& p, QVariant v, const TrunkTrace& trace,
                    const Eigen::VectorXd& dout, NetworkParameters& grad,
                    Eigen::VectorXd& d_enc_pos, Eigen::VectorXd& d_enc_neg) {
  const int enc_width = p.dims.encoding_width(v);
  switch (v) {
    case QVariant::kDeers:
    case QVariant::kDeersR:
    case QVariant::kDeersT: {
      Eigen::VectorXd dj = stack_backward(p.joint, trace.joint, dout, true, grad.joint);
      const Eigen::Index half = p.pos_stream.back().W.rows();
      Eigen::VectorXd du =
          stack_backward(p.pos_stream, trace.pos, dj.head(half), false, grad.pos_stream);
      Eigen::VectorXd dw =
          stack_backward(p.neg_stream, trace.neg, dj.tail(dj.size() - half), false,
                         grad.neg_stream);
      d_enc_pos += du.head(enc_width);
      d_enc_neg += dw.head(enc_width);
      return;
    }
    case QVariant::kDeersP: {
      Eigen::VectorXd dj = stack_backward(p.joint, trace.joint, dout, true, grad.joint);
      Eigen::VectorXd du = stack_backward(p.pos_stream, trace.pos, std::move(dj), false,
                                          grad.pos_stream);
      d_enc_pos += du.head(enc_width);
      return;
    }
    case QVariant::kDeersF: {
      Eigen::VectorXd dx = stack_backward(p.joint, trace.joint, dout, true, grad.joint);
      d_enc_pos += dx.head(enc_width);
      d_enc_neg += dx.segment(enc_width, enc_width);
      return;
    }
  }
  throw ConfigError("unknown variant value");
}

void encoder_backward(const NetworkParameters& p, QVariant v, const StateEncoding& enc,
                      const Eigen::VectorXd& d_enc_pos, const Eigen::VectorXd& d_enc_neg,
                      NetworkParameters& grad) {
  if (!variant_uses_gru(v)) return;
  if (!enc.traced) throw ConfigError("encoder_backward requires a traced encoding");
  gru_backward(*p.pos_encoder, enc.pos_trace, d_enc_pos, *grad.pos_encoder);
  if (variant_uses_negative(v))
    gru_backward(*p.neg_encoder, enc.neg_trace, d_enc_neg, *grad.neg_encoder);
}

}  // namespace deers
