#pragma once

// "NMDL" checkpoint layout (little-endian):
//   magic "NMDL" | u16 version (1)
//   u32 input_size | u32 in_channels | u32 stem_kernel | u32 stem_channels |
//   u32 stem_stride | u8 stem_pool | u32 block_count | block_count x (u8 kind, u32 channels) |
//   u32 classes | f32 bn_eps | f32 bn_momentum
//   u32 tensor_count | tensor_count x (u32 rank, rank x u32 dims, f32 data row-major)
// Tensors follow ResNet::state_tensors() order.

#include <cstdint>
#include <filesystem>

#include "nomadet/nn/resnet.hpp"

namespace nomadet::nn {

inline constexpr std::uint16_t kCheckpointVersion = 1;

void save_checkpoint(Model& model, const std::filesystem::path& path);
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace nomadet::nn
