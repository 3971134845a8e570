#pragma once

#include <string>
#include <vector>

#include "sleepssl/nn/layers.hpp"

namespace sleepssl {

// Binary weight file: magic, parameter count, then (name, shape, f32 data)
// records, little-endian. Loading matches strictly by name and shape.
void save_weights(const std::string& path,
                  const std::vector<nn::NamedParam>& params);
void load_weights(const std::string& path,
                  const std::vector<nn::NamedParam>& params);

// Stable digest of the serialized weights, used by the frozen-encoder guard.
std::uint64_t weights_digest(const std::vector<nn::NamedParam>& params);

}  // namespace sleepssl
