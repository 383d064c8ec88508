#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "amod/model.hpp"

namespace amod {

/// Binary checkpoint, little-endian throughout:
///
///   char[4]  magic "AMRB"
///   u16      format version (1)
///   u16      model kind (0 = gnn, 1 = mlp)
///   u64      episodes completed
///   u32      parameter count P
///   P x { u16 name length, name bytes, u32 rows, u32 cols }      manifest
///   P x { rows*cols f64, row-major }                             values
///   P x { i64 adam step, rows*cols f64 m, rows*cols f64 v }      optimizer state
///
/// GNN checkpoints carry no station count and load onto any network.
inline constexpr char kCheckpointMagic[4] = {'A', 'M', 'R', 'B'};
inline constexpr std::uint16_t kCheckpointVersion = 1;

struct CheckpointTensor {
  std::string name;
  Matrix value;
  Matrix first_moment;
  Matrix second_moment;
  std::int64_t step = 0;
};

struct Checkpoint {
  std::string kind;  // "gnn" or "mlp"
  std::uint64_t episodes_completed = 0;
  std::vector<CheckpointTensor> tensors;
};

Checkpoint snapshot(ActorCritic& model, std::uint64_t episodes_completed);

/// Copies values and optimizer state into `model`; names and shapes must match.
void restore(ActorCritic& model, const Checkpoint& ckpt);

/// Written to a temporary sibling and renamed into place.
void save_checkpoint(ActorCritic& model, const std::filesystem::path& path,
                     std::uint64_t episodes_completed = 0);
void write_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);

/// Throws FormatError on bad magic, unknown version or truncation.
Checkpoint read_checkpoint(const std::filesystem::path& path);

/// Rebuilds the model a checkpoint describes and restores it.
std::shared_ptr<ActorCritic> load_checkpoint(const std::filesystem::path& path,
                                             std::uint64_t* episodes_completed = nullptr);

}  // namespace amod
