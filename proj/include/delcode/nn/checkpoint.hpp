#pragma once

#include <filesystem>
#include <map>

#include "delcode/nn/network.hpp"

namespace delcode::nn {

/// Checkpoint container:
///
///   DELCODE-CHECKPOINT 1
///   kind <model kind>
///   in_dim <n> / layers <n> / hidden <n> / mlp <d1> <d2> ... / gru_bias <0|1>
///   hidden_activation <relu|tanh|identity> / bn_momentum <x> / bn_eps <x>
///   meta <key> <value>            (zero or more, sorted by key)
///   tensor <name> <rows> <cols>   (one per block, in storage order)
///   end
///
/// followed immediately by each tensor as little-endian IEEE-754 binary32,
/// row-major. Trainable parameters come first, then buffers.
struct Checkpoint {
    std::string kind;
    NetConfig net;
    std::map<std::string, std::string> meta;
    BiGruNet<float> model;
};

std::vector<std::uint8_t> serialize(const Checkpoint& ckpt);
Checkpoint deserialize(std::span<const std::uint8_t> bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Header text only (everything before the binary section).
std::string checkpoint_header(const Checkpoint& ckpt);

/// FNV-1a 64-bit over the serialized bytes.
std::uint64_t checkpoint_digest(const Checkpoint& ckpt);

}  // namespace delcode::nn
