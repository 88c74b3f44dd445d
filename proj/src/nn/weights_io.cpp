#include "gradlens/nn/weights_io.hpp"

#include <fstream>
#include <string>

#include "gradlens/binary_io.hpp"

namespace gradlens::nn {

namespace {

using Kind = WeightsError::Kind;

NetworkState read_file(const std::filesystem::path& path, const NetworkSpec* expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WeightsError(Kind::kIo, "cannot open weights file " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kWeightsMagic) {
    throw WeightsError(Kind::kBadMagic, "bad magic in weights file " + path.string());
  }
  NetworkSpec spec;
  try {
    if (!std::getline(in, line)) throw std::invalid_argument("missing input line");
    spec.input = parse_input(line);
    while (std::getline(in, line) && !line.empty()) spec.layers.push_back(parse_layer(line));
    if (!in) throw std::invalid_argument("header not terminated by an empty line");
    layer_output_shapes(spec);
  } catch (const std::invalid_argument& e) {
    throw WeightsError(Kind::kBadHeader, "malformed weights header: " + std::string(e.what()));
  }

  if (expected) {
    if (expected->input != spec.input) {
      throw WeightsError(Kind::kShapeMismatch, "shape mismatch at input: file has " +
                                                   format_input(spec.input) + ", expected " +
                                                   format_input(expected->input));
    }
    const std::size_t n = std::max(spec.layers.size(), expected->layers.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (i >= spec.layers.size() || i >= expected->layers.size() ||
          !(spec.layers[i] == expected->layers[i])) {
        throw WeightsError(Kind::kShapeMismatch, "shape mismatch at layer " + std::to_string(i));
      }
    }
  }

  NetworkState state;
  state.spec = spec;
  state.params = zero_gradients(spec);
  for (std::size_t i = 0; i < state.params.size(); ++i) {
    auto& p = state.params[i];
    if (!read_f32le(in, p.weights.values()) || !read_f32le(in, p.bias.values())) {
      throw WeightsError(Kind::kTruncated, "weights file truncated in layer " + std::to_string(i));
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw WeightsError(Kind::kTrailingData, "unexpected data after the last layer");
  }
  return state;
}

}  // namespace

void save_weights(const NetworkState& state, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw WeightsError(Kind::kIo, "cannot write weights file " + path.string());
  out << kWeightsMagic << '\n' << format_input(state.spec.input) << '\n';
  for (const auto& layer : state.spec.layers) out << format_layer(layer) << '\n';
  out << '\n';
  for (const auto& p : state.params) {
    write_f32le(out, p.weights.values());
    write_f32le(out, p.bias.values());
  }
  if (!out) throw WeightsError(Kind::kIo, "failed writing weights file " + path.string());
}

NetworkState load_weights(const std::filesystem::path& path) { return read_file(path, nullptr); }

NetworkState load_weights(const std::filesystem::path& path, const NetworkSpec& expected) {
  return read_file(path, &expected);
}

}  // namespace gradlens::nn
