#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "gateseed/nn/adam.hpp"
#include "gateseed/nn/network.hpp"

namespace gateseed::nn {

// Binary layout (little-endian):
//   "PCLN" | u32 version | u64 architecture digest | u32 record count |
//   records: u32 name length, name bytes, u32 rank, u32 dims[rank], f32 payload
// Optimizer state, when saved, uses records "adam.m/<name>", "adam.v/<name>"
// and a one-element "adam.step".
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
    NetworkParams<float> params;
    std::optional<AdamState<float>> adam;
};

void save_checkpoint(const std::string& path, const NetworkParams<float>& params,
                     const AdamState<float>* adam = nullptr);

// Throws IoError on malformed files and InvalidArgument when the stored
// digest differs from `arch`.
Checkpoint load_checkpoint(const std::string& path, const Architecture& arch = Architecture::detector());

}  // namespace gateseed::nn
