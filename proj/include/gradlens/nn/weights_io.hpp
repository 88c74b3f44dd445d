#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "gradlens/nn/network.hpp"

namespace gradlens::nn {

// File layout: "GRADLENS-W v1\n", "input H W C\n", one descriptor line per
// layer, an empty line, then every layer's weights followed by its bias as
// little-endian float32 in row-major order.
inline constexpr const char* kWeightsMagic = "GRADLENS-W v1";

class WeightsError : public std::runtime_error {
 public:
  enum class Kind { kIo, kBadMagic, kBadHeader, kTruncated, kTrailingData, kShapeMismatch };
  WeightsError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

void save_weights(const NetworkState& state, const std::filesystem::path& path);
NetworkState load_weights(const std::filesystem::path& path);
// Loads and checks the embedded spec against `expected`; a differing layer
// raises kShapeMismatch naming the layer.
NetworkState load_weights(const std::filesystem::path& path, const NetworkSpec& expected);

}  // namespace gradlens::nn
