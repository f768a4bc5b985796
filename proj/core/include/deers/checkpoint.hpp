#pragma once

#include <cstdint>
#include <string>

#include "deers/qnetwork.hpp"

namespace deers {

enum class ModelKind : std::uint32_t { kQNetwork = 1, kSimulator = 2 };

const char* to_string(ModelKind k);

class CheckpointError : public std::runtime_error {
 public:
  enum class Kind {
    kIo,
    kMagic,
    kVersion,
    kTruncated,
    kShape,
    kCorrupt,
    kKindMismatch,
    kVariantMismatch,
  };

  CheckpointError(Kind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct CheckpointMeta {
  ModelKind kind = ModelKind::kQNetwork;
  QVariant variant = QVariant::kDeers;
  Hyperparameters hyper;
  RewardMap rewards;
};

struct Checkpoint {
  NetworkParameters params;
  CheckpointMeta meta;
};

// Self-describing binary format: magic "DEERSCKPT", version u32, model kind,
// variant tag, hyperparameter and reward blocks, dimension block, then a
// directory of (name, rank, dims..., row-major float64 payload) entries and a
// trailing content hash. Round-trips all arrays bitwise.
void save_checkpoint(const NetworkParameters& params, const CheckpointMeta& meta,
                     const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// Guards for consumers that were pointed at the wrong artifact.
void expect_kind(const CheckpointMeta& meta, ModelKind kind, const std::string& context);
void expect_variant(const CheckpointMeta& meta, QVariant variant, const std::string& context);

}  // namespace deers
