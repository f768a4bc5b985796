#include "deers/checkpoint.hpp"

#include <fmt/format.h>

#include <cstring>
#include <fstream>
#include <vector>

namespace deers {

namespace {

constexpr char kMagic[] = "DEERSCKPT";
constexpr std::size_t kMagicLen = 9;
constexpr std::uint32_t kVersion = 1;

std::uint64_t fnv1a64(const unsigned char* data, std::size_t n) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= data[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Writer {
 public:
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
  const std::vector<unsigned char>& bytes() const { return buf_; }

 private:
  std::vector<unsigned char> buf_;
};

class Reader {
 public:
  Reader(const unsigned char* data, std::size_t n) : data_(data), size_(n) {}

  void raw(void* p, std::size_t n) {
    if (pos_ + n > size_)
      throw CheckpointError(CheckpointError::Kind::kTruncated, "checkpoint: truncated file");
    std::memcpy(p, data_ + pos_, n);
    pos_ += n;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    raw(&v, sizeof v);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    raw(&v, sizeof v);
    return v;
  }
  double f64() {
    double v;
    raw(&v, sizeof v);
    return v;
  }
  std::string str() {
    const std::uint32_t n = u32();
    if (n > size_ - pos_)
      throw CheckpointError(CheckpointError::Kind::kTruncated, "checkpoint: truncated string");
    std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }

 private:
  const unsigned char* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

void write_dims(Writer& w, const NetworkDims& d) {
  w.u32(static_cast<std::uint32_t>(d.embed_dim));
  w.u32(static_cast<std::uint32_t>(d.hidden_dim));
  w.u32(static_cast<std::uint32_t>(d.window));
  w.u32(static_cast<std::uint32_t>(d.output_dim));
  w.u32(static_cast<std::uint32_t>(d.stream_widths.size()));
  for (int v : d.stream_widths) w.u32(static_cast<std::uint32_t>(v));
  w.u32(static_cast<std::uint32_t>(d.joint_hidden.size()));
  for (int v : d.joint_hidden) w.u32(static_cast<std::uint32_t>(v));
}

NetworkDims read_dims(Reader& r) {
  NetworkDims d;
  d.embed_dim = static_cast<int>(r.u32());
  d.hidden_dim = static_cast<int>(r.u32());
  d.window = static_cast<int>(r.u32());
  d.output_dim = static_cast<int>(r.u32());
  d.stream_widths.resize(r.u32());
  for (auto& v : d.stream_widths) v = static_cast<int>(r.u32());
  d.joint_hidden.resize(r.u32());
  for (auto& v : d.joint_hidden) v = static_cast<int>(r.u32());
  return d;
}

}  // namespace

const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::kQNetwork:
      return "q-network";
    case ModelKind::kSimulator:
      return "simulator";
  }
  return "?";
}

void save_checkpoint(const NetworkParameters& params, const CheckpointMeta& meta,
                     const std::string& path) {
  Writer w;
  w.raw(kMagic, kMagicLen);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(meta.kind));
  w.u32(static_cast<std::uint32_t>(meta.variant));
  w.f64(meta.hyper.gamma);
  w.f64(meta.hyper.alpha);
  w.f64(meta.hyper.learning_rate);
  w.f64(meta.hyper.gradient_clip);
  w.u64(meta.hyper.seed);
  w.f64(meta.rewards.skip);
  w.f64(meta.rewards.click);
  w.f64(meta.rewards.order);
  write_dims(w, params.dims);

  const auto views = array_views(params);
  w.u64(views.size());
  for (const auto& v : views) {
    w.str(v.name);
    w.u32(2);  // rank
    w.u64(v.rows);
    w.u64(v.cols);
    // row-major payload
    for (std::size_t r = 0; r < v.rows; ++r)
      for (std::size_t c = 0; c < v.cols; ++c) w.f64(v.data[c * v.rows + r]);
  }
  const std::uint64_t digest = fnv1a64(w.bytes().data(), w.bytes().size());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw CheckpointError(CheckpointError::Kind::kIo,
                          fmt::format("cannot write checkpoint '{}'", path));
  out.write(reinterpret_cast<const char*>(w.bytes().data()),
            static_cast<std::streamsize>(w.bytes().size()));
  out.write(reinterpret_cast<const char*>(&digest), sizeof digest);
  if (!out)
    throw CheckpointError(CheckpointError::Kind::kIo,
                          fmt::format("short write on checkpoint '{}'", path));
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw CheckpointError(CheckpointError::Kind::kIo,
                          fmt::format("cannot open checkpoint '{}'", path));
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < kMagicLen + sizeof(std::uint32_t) + sizeof(std::uint64_t))
    throw CheckpointError(CheckpointError::Kind::kTruncated,
                          fmt::format("checkpoint '{}' is truncated", path));
  if (std::memcmp(bytes.data(), kMagic, kMagicLen) != 0)
    throw CheckpointError(CheckpointError::Kind::kMagic,
                          fmt::format("'{}' is not a DEERS checkpoint", path));

  Reader r(bytes.data(), bytes.size() - sizeof(std::uint64_t));
  char magic[kMagicLen];
  r.raw(magic, kMagicLen);
  const std::uint32_t version = r.u32();
  if (version != kVersion)
    throw CheckpointError(
        CheckpointError::Kind::kVersion,
        fmt::format("checkpoint '{}': format version {} unsupported (expected {})", path,
                    version, kVersion));

  Checkpoint ckpt;
  const std::uint32_t kind = r.u32();
  if (kind != static_cast<std::uint32_t>(ModelKind::kQNetwork) &&
      kind != static_cast<std::uint32_t>(ModelKind::kSimulator))
    throw CheckpointError(CheckpointError::Kind::kCorrupt,
                          fmt::format("checkpoint '{}': unknown model kind {}", path, kind));
  ckpt.meta.kind = static_cast<ModelKind>(kind);
  const std::uint32_t variant = r.u32();
  if (variant > static_cast<std::uint32_t>(QVariant::kDeersR))
    throw CheckpointError(CheckpointError::Kind::kCorrupt,
                          fmt::format("checkpoint '{}': unknown variant tag {}", path, variant));
  ckpt.meta.variant = static_cast<QVariant>(variant);
  ckpt.meta.hyper.gamma = r.f64();
  ckpt.meta.hyper.alpha = r.f64();
  ckpt.meta.hyper.learning_rate = r.f64();
  ckpt.meta.hyper.gradient_clip = r.f64();
  ckpt.meta.hyper.seed = r.u64();
  ckpt.meta.rewards.skip = r.f64();
  ckpt.meta.rewards.click = r.f64();
  ckpt.meta.rewards.order = r.f64();
  const NetworkDims dims = read_dims(r);

  try {
    dims.validate();
    ckpt.params = init_network(ckpt.meta.variant, dims, 0);
  } catch (const ConfigError& e) {
    throw CheckpointError(CheckpointError::Kind::kShape,
                          fmt::format("checkpoint '{}': {}", path, e.what()));
  }

  auto views = array_views(ckpt.params);
  const std::uint64_t count = r.u64();
  if (count != views.size())
    throw CheckpointError(
        CheckpointError::Kind::kShape,
        fmt::format("checkpoint '{}': {} arrays on disk, layout expects {}", path, count,
                    views.size()));
  for (auto& v : views) {
    const std::string name = r.str();
    if (name != v.name)
      throw CheckpointError(
          CheckpointError::Kind::kShape,
          fmt::format("checkpoint '{}': array '{}' where '{}' expected", path, name, v.name));
    const std::uint32_t rank = r.u32();
    if (rank != 2)
      throw CheckpointError(CheckpointError::Kind::kShape,
                            fmt::format("checkpoint '{}': array '{}' has rank {}", path, name,
                                        rank));
    const std::uint64_t rows = r.u64();
    const std::uint64_t cols = r.u64();
    if (rows != v.rows || cols != v.cols)
      throw CheckpointError(
          CheckpointError::Kind::kShape,
          fmt::format("checkpoint '{}': array '{}' is {}x{}, layout expects {}x{}", path, name,
                      rows, cols, v.rows, v.cols));
    for (std::size_t row = 0; row < v.rows; ++row)
      for (std::size_t col = 0; col < v.cols; ++col) v.data[col * v.rows + row] = r.f64();
  }
  if (r.pos() != bytes.size() - sizeof(std::uint64_t))
    throw CheckpointError(CheckpointError::Kind::kCorrupt,
                          fmt::format("checkpoint '{}': trailing bytes", path));

  std::uint64_t stored;
  std::memcpy(&stored, bytes.data() + bytes.size() - sizeof stored, sizeof stored);
  const std::uint64_t digest = fnv1a64(bytes.data(), bytes.size() - sizeof stored);
  if (stored != digest)
    throw CheckpointError(CheckpointError::Kind::kCorrupt,
                          fmt::format("checkpoint '{}': content hash mismatch", path));
  return ckpt;
}

void expect_kind(const CheckpointMeta& meta, ModelKind kind, const std::string& context) {
  if (meta.kind != kind)
    throw CheckpointError(CheckpointError::Kind::kKindMismatch,
                          fmt::format("{}: checkpoint holds a {}, expected a {}", context,
                                      to_string(meta.kind), to_string(kind)));
}

void expect_variant(const CheckpointMeta& meta, QVariant variant, const std::string& context) {
  if (meta.variant != variant)
    throw CheckpointError(
        CheckpointError::Kind::kVariantMismatch,
        fmt::format("{}: checkpoint variant {} does not match requested {}", context,
                    to_string(meta.variant), to_string(variant)));
}

}  // namespace deers
