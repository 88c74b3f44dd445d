#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace gradlens::nn {

enum class Activation { kNone, kRelu, kSoftmax };

struct ConvSpec {
  int kernels = 0;
  int size = 0;
  int stride = 1;
  int pad = 0;
  Activation activation = Activation::kRelu;
  friend bool operator==(const ConvSpec&, const ConvSpec&) = default;
};

struct PoolSpec {
  int size = 2;
  int stride = 2;
  friend bool operator==(const PoolSpec&, const PoolSpec&) = default;
};

struct FlattenSpec {
  friend bool operator==(const FlattenSpec&, const FlattenSpec&) = default;
};

struct DenseSpec {
  int units = 0;
  Activation activation = Activation::kNone;
  friend bool operator==(const DenseSpec&, const DenseSpec&) = default;
};

struct DropoutSpec {
  float rate = 0.5f;
  friend bool operator==(const DropoutSpec&, const DropoutSpec&) = default;
};

using LayerSpec = std::variant<ConvSpec, PoolSpec, FlattenSpec, DenseSpec, DropoutSpec>;

// Height, width, channels. Flat vectors are represented as (1, 1, n).
struct Shape3 {
  int h = 0;
  int w = 0;
  int c = 0;
  std::size_t count() const { return static_cast<std::size_t>(h) * w * c; }
  friend bool operator==(const Shape3&, const Shape3&) = default;
};

struct NetworkSpec {
  Shape3 input;
  std::vector<LayerSpec> layers;

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

// The three-conv / four-pool mammography CNN: 1,386,177 trainable parameters.
NetworkSpec mammo_cnn_spec();

class SpecError : public std::invalid_argument {
 public:
  SpecError(std::size_t layer, const std::string& what)
      : std::invalid_argument("layer " + std::to_string(layer) + ": " + what), layer_(layer) {}
  std::size_t layer() const { return layer_; }

 private:
  std::size_t layer_;
};

// Output shape of every layer; throws SpecError naming the first layer whose
// input is inconsistent with its descriptor.
std::vector<Shape3> layer_output_shapes(const NetworkSpec& spec);

std::vector<std::size_t> layer_parameter_counts(const NetworkSpec& spec);
std::size_t parameter_count(const NetworkSpec& spec);

bool is_conv(const LayerSpec& layer);

// One-line text form used by the weights file, e.g. "conv 16 5 1 0 relu".
std::string format_layer(const LayerSpec& layer);
LayerSpec parse_layer(std::string_view line);
std::string format_input(const Shape3& input);
Shape3 parse_input(std::string_view line);

}  // namespace gradlens::nn
