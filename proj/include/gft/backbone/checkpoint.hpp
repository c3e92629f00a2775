#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gft/numcore/params.hpp"

namespace gft::backbone {

// Binary layout (all integers little-endian):
//   magic   "GFTCKPT\0"      8 bytes
//   version u8               kCheckpointVersion
//   count   u32
//   count x entry:
//     name_len u32, name bytes
//     dtype    u8             0 = float32
//     frozen   u8
//     ndim     u32, dims u32 x ndim
//     payload  float32 x prod(dims)
inline constexpr std::uint8_t kCheckpointVersion = 1;

struct CheckpointEntry {
  std::string name;
  std::vector<std::size_t> shape;
  bool frozen = true;
  std::vector<float> payload;
};

void save_checkpoint(const numcore::ParamStore& store, const std::filesystem::path& path);
std::vector<CheckpointEntry> read_checkpoint(const std::filesystem::path& path);

// Copies every entry into `store`. Throws FormatError when an entry name is
// unknown (all unknown names are listed), a shape differs, or a parameter of
// the store has no entry. Frozen flags are restored from the file.
void load_checkpoint(numcore::ParamStore& store, const std::filesystem::path& path);
void apply_checkpoint(numcore::ParamStore& store, const std::vector<CheckpointEntry>& entries);

}  // namespace gft::backbone
