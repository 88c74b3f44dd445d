#include "gradlens/nn/spec.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

namespace gradlens::nn {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::kRelu:
      return "relu";
    case Activation::kSoftmax:
      return "softmax";
    case Activation::kNone:
      break;
  }
  return "linear";
}

Activation parse_activation(const std::string& s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "softmax") return Activation::kSoftmax;
  if (s == "linear") return Activation::kNone;
  throw std::invalid_argument("unknown activation '" + s + "'");
}

std::vector<std::string> split_words(std::string_view line) {
  std::istringstream in{std::string(line)};
  std::vector<std::string> words;
  for (std::string w; in >> w;) words.push_back(w);
  return words;
}

int to_int(const std::string& s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("expected integer, got '" + s + "'");
  }
  return v;
}

}  // namespace

NetworkSpec mammo_cnn_spec() {
  NetworkSpec spec;
  spec.input = {224, 224, 3};
  spec.layers = {
      ConvSpec{16, 5, 1, 0, Activation::kRelu},
      PoolSpec{2, 2},
      ConvSpec{16, 5, 1, 0, Activation::kRelu},
      PoolSpec{2, 2},
      ConvSpec{14, 3, 1, 1, Activation::kRelu},
      PoolSpec{2, 2},
      PoolSpec{2, 2},
      FlattenSpec{},
      DenseSpec{512, Activation::kRelu},
      DenseSpec{256, Activation::kRelu},
      DenseSpec{128, Activation::kRelu},
      DropoutSpec{0.5f},
      DenseSpec{3, Activation::kSoftmax},
  };
  return spec;
}

bool is_conv(const LayerSpec& layer) { return std::holds_alternative<ConvSpec>(layer); }

std::vector<Shape3> layer_output_shapes(const NetworkSpec& spec) {
  if (spec.input.h <= 0 || spec.input.w <= 0 || spec.input.c <= 0) {
    throw SpecError(0, "input shape must be positive");
  }
  std::vector<Shape3> shapes;
  Shape3 cur = spec.input;
  bool flat = false;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const auto& layer = spec.layers[i];
    Shape3 next = std::visit(
        Overloaded{
            [&](const ConvSpec& c) {
              if (flat) throw SpecError(i, "conv after flatten");
              if (c.kernels <= 0 || c.size <= 0 || c.stride <= 0 || c.pad < 0) {
                throw SpecError(i, "conv parameters must be positive");
              }
              if (c.activation == Activation::kSoftmax) throw SpecError(i, "softmax on conv");
              const int ph = cur.h + 2 * c.pad, pw = cur.w + 2 * c.pad;
              if (c.size > ph || c.size > pw) {
                throw SpecError(i, "kernel " + std::to_string(c.size) + " larger than padded input " +
                                       std::to_string(ph) + "x" + std::to_string(pw));
              }
              return Shape3{(ph - c.size) / c.stride + 1, (pw - c.size) / c.stride + 1, c.kernels};
            },
            [&](const PoolSpec& p) {
              if (flat) throw SpecError(i, "pooling after flatten");
              if (p.size <= 0 || p.stride <= 0) throw SpecError(i, "pool parameters must be positive");
              if (p.size > cur.h || p.size > cur.w) {
                throw SpecError(i, "pool window larger than input " + std::to_string(cur.h) + "x" +
                                       std::to_string(cur.w));
              }
              return Shape3{(cur.h - p.size) / p.stride + 1, (cur.w - p.size) / p.stride + 1, cur.c};
            },
            [&](const FlattenSpec&) {
              flat = true;
              return Shape3{1, 1, static_cast<int>(cur.count())};
            },
            [&](const DenseSpec& d) {
              if (!flat) throw SpecError(i, "dense layer requires a flattened input");
              if (d.units <= 0) throw SpecError(i, "dense units must be positive");
              return Shape3{1, 1, d.units};
            },
            [&](const DropoutSpec& d) {
              if (!(d.rate >= 0.0f && d.rate < 1.0f)) throw SpecError(i, "dropout rate outside [0,1)");
              return cur;
            },
        },
        layer);
    if (const auto* d = std::get_if<DenseSpec>(&layer);
        d && d->activation == Activation::kSoftmax && i + 1 != spec.layers.size()) {
      throw SpecError(i, "softmax is only allowed on the last layer");
    }
    shapes.push_back(next);
    cur = next;
  }
  return shapes;
}

std::vector<std::size_t> layer_parameter_counts(const NetworkSpec& spec) {
  const auto shapes = layer_output_shapes(spec);
  std::vector<std::size_t> counts;
  Shape3 in = spec.input;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    std::size_t n = 0;
    if (const auto* c = std::get_if<ConvSpec>(&spec.layers[i])) {
      n = static_cast<std::size_t>(c->size) * c->size * in.c * c->kernels + c->kernels;
    } else if (const auto* d = std::get_if<DenseSpec>(&spec.layers[i])) {
      n = in.count() * d->units + d->units;
    }
    counts.push_back(n);
    in = shapes[i];
  }
  return counts;
}

std::size_t parameter_count(const NetworkSpec& spec) {
  std::size_t total = 0;
  for (auto n : layer_parameter_counts(spec)) total += n;
  return total;
}

std::string format_layer(const LayerSpec& layer) {
  return std::visit(
      Overloaded{
          [](const ConvSpec& c) {
            return "conv " + std::to_string(c.kernels) + " " + std::to_string(c.size) + " " +
                   std::to_string(c.stride) + " " + std::to_string(c.pad) + " " +
                   activation_name(c.activation);
          },
          [](const PoolSpec& p) {
            return "maxpool " + std::to_string(p.size) + " " + std::to_string(p.stride);
          },
          [](const FlattenSpec&) { return std::string("flatten"); },
          [](const DenseSpec& d) {
            return "dense " + std::to_string(d.units) + " " + activation_name(d.activation);
          },
          [](const DropoutSpec& d) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(d.rate));
            return "dropout " + std::string(buf);
          },
      },
      layer);
}

LayerSpec parse_layer(std::string_view line) {
  const auto w = split_words(line);
  if (w.empty()) throw std::invalid_argument("empty layer line");
  const auto expect = [&](std::size_t n) {
    if (w.size() != n) {
      throw std::invalid_argument("layer line '" + std::string(line) + "' has " +
                                  std::to_string(w.size()) + " fields, expected " + std::to_string(n));
    }
  };
  if (w[0] == "conv") {
    expect(6);
    return ConvSpec{to_int(w[1]), to_int(w[2]), to_int(w[3]), to_int(w[4]), parse_activation(w[5])};
  }
  if (w[0] == "maxpool") {
    expect(3);
    return PoolSpec{to_int(w[1]), to_int(w[2])};
  }
  if (w[0] == "flatten") {
    expect(1);
    return FlattenSpec{};
  }
  if (w[0] == "dense") {
    expect(3);
    return DenseSpec{to_int(w[1]), parse_activation(w[2])};
  }
  if (w[0] == "dropout") {
    expect(2);
    return DropoutSpec{std::stof(w[1])};
  }
  throw std::invalid_argument("unknown layer kind '" + w[0] + "'");
}

std::string format_input(const Shape3& input) {
  return "input " + std::to_string(input.h) + " " + std::to_string(input.w) + " " +
         std::to_string(input.c);
}

Shape3 parse_input(std::string_view line) {
  const auto w = split_words(line);
  if (w.size() != 4 || w[0] != "input") {
    throw std::invalid_argument("expected 'input H W C', got '" + std::string(line) + "'");
  }
  return {to_int(w[1]), to_int(w[2]), to_int(w[3])};
}

}  // namespace gradlens::nn
