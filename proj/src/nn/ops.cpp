#include "gradlens/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>

namespace gradlens::nn {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

void check_conv_args(const Tensor& input, const Tensor& weights, const Tensor& bias, int stride,
                     int pad) {
  require(input.rank() == 3, "conv2d: input must be rank 3, got " + input.shape_string());
  require(weights.rank() == 4 && weights.dim(0) == weights.dim(1),
          "conv2d: weights must be (k,k,cin,cout), got " + weights.shape_string());
  require(weights.dim(2) == input.dim(2),
          "conv2d: input has " + std::to_string(input.dim(2)) + " channels, kernel expects " +
              std::to_string(weights.dim(2)));
  require(bias.size() == static_cast<std::size_t>(weights.dim(3)), "conv2d: bias length mismatch");
  require(stride > 0 && pad >= 0, "conv2d: bad stride/pad");
  const int k = weights.dim(0);
  require(k <= input.dim(0) + 2 * pad && k <= input.dim(1) + 2 * pad,
          "conv2d: kernel " + std::to_string(k) + " larger than padded input " +
              input.shape_string());
}

}  // namespace

namespace {

// 16-lane float vector (one AVX-512 register, two AVX2 registers).
using Vec16 = float __attribute__((vector_size(64)));
constexpr int kLanes = 16;

inline Vec16 load16(const float* p) {
  Vec16 v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

inline void store16(float* p, Vec16 v) { std::memcpy(p, &v, sizeof v); }

inline int round_up_lanes(int n) { return (n + kLanes - 1) / kLanes * kLanes; }

// Weights (k,k,cin,cout) repacked as (k,k,cin,cout_padded) with zero lanes.
std::vector<float> pack_weights(const Tensor& weights, int cout_padded) {
  const int k = weights.dim(0), cin = weights.dim(2), cout = weights.dim(3);
  std::vector<float> packed(static_cast<std::size_t>(k) * k * cin * cout_padded, 0.0f);
  for (std::size_t row = 0; row < static_cast<std::size_t>(k) * k * cin; ++row) {
    std::copy_n(weights.data() + row * cout, cout, packed.data() + row * cout_padded);
  }
  return packed;
}

// Output pixels computed together in the interior fast path.
constexpr int kBlock = 8;

struct ConvGeometry {
  int h, w, cin, cout, cout_padded, k, stride, pad, oh, ow;

  // Output columns whose receptive field lies entirely inside the input.
  int ox_begin() const { return pad == 0 ? 0 : (pad + stride - 1) / stride; }
  int ox_end() const {
    // largest ox with ox*stride - pad + k <= w
    const int last = (w + pad - k) / stride;
    return std::min(ow, last + 1);
  }
};

void conv_pixel(const ConvGeometry& g, const float* in, const float* wp, const float* bias_p,
                int oy, int ox, float* out) {
  const int iy0 = oy * g.stride - g.pad, ix0 = ox * g.stride - g.pad;
  for (int j = 0; j < g.cout_padded; j += kLanes) {
    Vec16 acc = load16(bias_p + j);
    for (int ky = 0; ky < g.k; ++ky) {
      const int iy = iy0 + ky;
      if (iy < 0 || iy >= g.h) continue;
      for (int kx = 0; kx < g.k; ++kx) {
        const int ix = ix0 + kx;
        if (ix < 0 || ix >= g.w) continue;
        const float* px = in + (static_cast<std::size_t>(iy) * g.w + ix) * g.cin;
        const float* wk = wp + static_cast<std::size_t>(ky * g.k + kx) * g.cin * g.cout_padded + j;
        for (int ci = 0; ci < g.cin; ++ci) acc += px[ci] * load16(wk + static_cast<std::size_t>(ci) * g.cout_padded);
      }
    }
    store16(out + j, acc);
  }
}

void conv_block(const ConvGeometry& g, const float* __restrict in, const float* __restrict wp,
                const float* __restrict bias_p, int oy, int ox, float* __restrict out) {
  const int iy0 = oy * g.stride - g.pad, ix0 = ox * g.stride - g.pad;
  const std::size_t pixel_step = static_cast<std::size_t>(g.stride) * g.cin;
  for (int j = 0; j < g.cout_padded; j += kLanes) {
    Vec16 acc[kBlock];
    const Vec16 b = load16(bias_p + j);
    for (auto& a : acc) a = b;
    for (int ky = 0; ky < g.k; ++ky) {
      const float* row = in + (static_cast<std::size_t>(iy0 + ky) * g.w + ix0) * g.cin;
      for (int kx = 0; kx < g.k; ++kx) {
        const float* px = row + static_cast<std::size_t>(kx) * g.cin;
        const float* wk = wp + static_cast<std::size_t>(ky * g.k + kx) * g.cin * g.cout_padded + j;
        for (int ci = 0; ci < g.cin; ++ci) {
          const Vec16 wv = load16(wk + static_cast<std::size_t>(ci) * g.cout_padded);
          for (int bi = 0; bi < kBlock; ++bi) acc[bi] += px[bi * pixel_step + ci] * wv;
        }
      }
    }
    for (int bi = 0; bi < kBlock; ++bi) store16(out + static_cast<std::size_t>(bi) * g.cout_padded + j, acc[bi]);
  }
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias, int stride, int pad,
              Activation activation) {
  check_conv_args(input, weights, bias, stride, pad);
  ConvGeometry g{};
  g.h = input.dim(0);
  g.w = input.dim(1);
  g.cin = input.dim(2);
  g.k = weights.dim(0);
  g.cout = weights.dim(3);
  g.cout_padded = round_up_lanes(g.cout);
  g.stride = stride;
  g.pad = pad;
  g.oh = (g.h + 2 * pad - g.k) / stride + 1;
  g.ow = (g.w + 2 * pad - g.k) / stride + 1;

  const auto wp = pack_weights(weights, g.cout_padded);
  std::vector<float> bias_p(g.cout_padded, 0.0f);
  std::copy_n(bias.data(), g.cout, bias_p.begin());

  Tensor out({g.oh, g.ow, g.cout});
  std::vector<float> row(static_cast<std::size_t>(g.ow) * g.cout_padded);
  const int ox_lo = g.ox_begin(), ox_hi = g.ox_end();
  const bool relu = activation == Activation::kRelu;
  for (int oy = 0; oy < g.oh; ++oy) {
    const int iy0 = oy * stride - pad;
    const bool row_inside = iy0 >= 0 && iy0 + g.k <= g.h;
    int ox = 0;
    while (ox < g.ow) {
      float* dst = row.data() + static_cast<std::size_t>(ox) * g.cout_padded;
      if (row_inside && ox >= ox_lo && ox + kBlock <= ox_hi) {
        conv_block(g, input.data(), wp.data(), bias_p.data(), oy, ox, dst);
        ox += kBlock;
      } else {
        conv_pixel(g, input.data(), wp.data(), bias_p.data(), oy, ox, dst);
        ++ox;
      }
    }
    float* o = out.data() + static_cast<std::size_t>(oy) * g.ow * g.cout;
    for (int x = 0; x < g.ow; ++x) {
      const float* src = row.data() + static_cast<std::size_t>(x) * g.cout_padded;
      for (int co = 0; co < g.cout; ++co) {
        o[static_cast<std::size_t>(x) * g.cout + co] = relu ? (src[co] > 0.0f ? src[co] : 0.0f) : src[co];
      }
    }
  }
  return out;
}

void conv2d_backward(const Tensor& input, const Tensor& output, const Tensor& grad_output,
                     const Tensor& weights, int stride, int pad, Activation activation,
                     Tensor* grad_weights, Tensor* grad_bias, Tensor* grad_input) {
  require(output.same_shape(grad_output), "conv2d_backward: gradient shape mismatch");
  ConvGeometry g{};
  g.h = input.dim(0);
  g.w = input.dim(1);
  g.cin = input.dim(2);
  g.k = weights.dim(0);
  g.cout = weights.dim(3);
  g.cout_padded = round_up_lanes(g.cout);
  g.stride = stride;
  g.pad = pad;
  g.oh = output.dim(0);
  g.ow = output.dim(1);
  const std::size_t npix = static_cast<std::size_t>(g.oh) * g.ow;

  // Pre-activation gradient, channel-padded; rows that are entirely zero are
  // skipped below.
  std::vector<float> gp(npix * g.cout_padded, 0.0f);
  std::vector<unsigned char> live(npix, 0);
  const bool relu = activation == Activation::kRelu;
  for (std::size_t p = 0; p < npix; ++p) {
    const float* go = grad_output.data() + p * g.cout;
    const float* o = output.data() + p * g.cout;
    float* dst = gp.data() + p * g.cout_padded;
    for (int co = 0; co < g.cout; ++co) dst[co] = !relu || o[co] > 0.0f ? go[co] : 0.0f;
    bool any = false;
    for (int co = 0; co < g.cout; ++co) any |= dst[co] != 0.0f;
    live[p] = any;
  }

  if (grad_bias) {
    for (std::size_t p = 0; p < npix; ++p) {
      if (!live[p]) continue;
      for (int co = 0; co < g.cout; ++co) (*grad_bias)[co] += gp[p * g.cout_padded + co];
    }
  }

  const float* in = input.data();
  if (grad_weights) {
    std::vector<float> dw(static_cast<std::size_t>(g.k) * g.k * g.cin * g.cout_padded, 0.0f);
    // Row-major over output rows so each gradient row stays cache resident
    // while all k*k taps consume it.
    for (int oy = 0; oy < g.oh; ++oy) {
      for (int ky = 0; ky < g.k; ++ky) {
        const int iy = oy * stride + ky - pad;
        if (iy < 0 || iy >= g.h) continue;
        for (int kx = 0; kx < g.k; ++kx) {
          // Output columns whose tap (ky, kx) lands inside the input.
          const int ox_lo = std::max(0, (g.pad - kx + g.stride - 1) / g.stride);
          const int ox_hi = std::min(g.ow, (g.w - 1 + g.pad - kx) / g.stride + 1);
          float* dwk = dw.data() + static_cast<std::size_t>(ky * g.k + kx) * g.cin * g.cout_padded;
          for (int j = 0; j < g.cout_padded; j += kLanes) {
            for (int ci = 0; ci < g.cin; ++ci) {
              // Four independent chains hide the FMA latency.
              Vec16 acc0 = {}, acc1 = {}, acc2 = {}, acc3 = {};
              const std::size_t step = static_cast<std::size_t>(stride) * g.cin;
              const float* in_row = in + static_cast<std::size_t>(iy) * g.w * g.cin + ci;
              const float* g_row = gp.data() + static_cast<std::size_t>(oy) * g.ow * g.cout_padded + j;
              int ox = ox_lo;
              for (; ox + 3 < ox_hi; ox += 4) {
                const float* px = in_row + static_cast<std::size_t>(ox * stride + kx - pad) * g.cin;
                const float* gq = g_row + static_cast<std::size_t>(ox) * g.cout_padded;
                acc0 += px[0] * load16(gq);
                acc1 += px[step] * load16(gq + g.cout_padded);
                acc2 += px[2 * step] * load16(gq + 2 * g.cout_padded);
                acc3 += px[3 * step] * load16(gq + 3 * g.cout_padded);
              }
              for (; ox < ox_hi; ++ox) {
                acc0 += in_row[static_cast<std::size_t>(ox * stride + kx - pad) * g.cin] *
                        load16(g_row + static_cast<std::size_t>(ox) * g.cout_padded);
              }
              float* d = dwk + static_cast<std::size_t>(ci) * g.cout_padded + j;
              store16(d, load16(d) + ((acc0 + acc1) + (acc2 + acc3)));
            }
          }
        }
      }
    }
    for (std::size_t r = 0; r < static_cast<std::size_t>(g.k) * g.k * g.cin; ++r) {
      for (int co = 0; co < g.cout; ++co) (*grad_weights)[r * g.cout + co] += dw[r * g.cout_padded + co];
    }
  }

  if (grad_input) {
    const int cin_padded = round_up_lanes(g.cin);
    // (k, k, cout, cin_padded)
    std::vector<float> wt(static_cast<std::size_t>(g.k) * g.k * g.cout * cin_padded, 0.0f);
    for (int kk = 0; kk < g.k * g.k; ++kk) {
      for (int ci = 0; ci < g.cin; ++ci) {
        for (int co = 0; co < g.cout; ++co) {
          wt[(static_cast<std::size_t>(kk) * g.cout + co) * cin_padded + ci] =
              weights[(static_cast<std::size_t>(kk) * g.cin + ci) * g.cout + co];
        }
      }
    }
    std::vector<float> din(static_cast<std::size_t>(g.h) * g.w * cin_padded, 0.0f);
    for (int oy = 0; oy < g.oh; ++oy) {
      for (int ox = 0; ox < g.ow; ++ox) {
        const std::size_t p = static_cast<std::size_t>(oy) * g.ow + ox;
        if (!live[p]) continue;
        const float* gv = gp.data() + p * g.cout_padded;
        for (int ky = 0; ky < g.k; ++ky) {
          const int iy = oy * stride + ky - pad;
          if (iy < 0 || iy >= g.h) continue;
          for (int kx = 0; kx < g.k; ++kx) {
            const int ix = ox * stride + kx - pad;
            if (ix < 0 || ix >= g.w) continue;
            float* d = din.data() + (static_cast<std::size_t>(iy) * g.w + ix) * cin_padded;
            const float* wk = wt.data() + static_cast<std::size_t>(ky * g.k + kx) * g.cout * cin_padded;
            for (int jb = 0; jb < cin_padded; jb += kLanes) {
              Vec16 a0 = {}, a1 = {}, a2 = {}, a3 = {};
              const float* wj = wk + jb;
              int co = 0;
              for (; co + 3 < g.cout; co += 4) {
                a0 += gv[co] * load16(wj + static_cast<std::size_t>(co) * cin_padded);
                a1 += gv[co + 1] * load16(wj + static_cast<std::size_t>(co + 1) * cin_padded);
                a2 += gv[co + 2] * load16(wj + static_cast<std::size_t>(co + 2) * cin_padded);
                a3 += gv[co + 3] * load16(wj + static_cast<std::size_t>(co + 3) * cin_padded);
              }
              for (; co < g.cout; ++co) a0 += gv[co] * load16(wj + static_cast<std::size_t>(co) * cin_padded);
              store16(d + jb, load16(d + jb) + ((a0 + a1) + (a2 + a3)));
            }
          }
        }
      }
    }
    *grad_input = Tensor(input.shape());
    for (std::size_t q = 0; q < static_cast<std::size_t>(g.h) * g.w; ++q) {
      std::copy_n(din.data() + q * cin_padded, g.cin, grad_input->data() + q * g.cin);
    }
  }
}

Tensor maxpool2d(const Tensor& input, int size, int stride, std::vector<std::int32_t>* argmax) {
  require(input.rank() == 3, "maxpool2d: input must be rank 3");
  const int h = input.dim(0), w = input.dim(1), c = input.dim(2);
  require(size > 0 && stride > 0 && size <= h && size <= w, "maxpool2d: window exceeds input");
  const int oh = (h - size) / stride + 1;
  const int ow = (w - size) / stride + 1;
  Tensor out({oh, ow, c});
  if (argmax) argmax->assign(out.size(), 0);
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      for (int ch = 0; ch < c; ++ch) {
        float best = -INFINITY;
        std::int32_t best_idx = -1;
        for (int dy = 0; dy < size; ++dy) {
          for (int dx = 0; dx < size; ++dx) {
            const std::size_t idx =
                (static_cast<std::size_t>(oy * stride + dy) * w + (ox * stride + dx)) * c + ch;
            // Strict '>' keeps the first maximum on ties.
            if (best_idx < 0 || input[idx] > best) {
              best = input[idx];
              best_idx = static_cast<std::int32_t>(idx);
            }
          }
        }
        const std::size_t o = (static_cast<std::size_t>(oy) * ow + ox) * c + ch;
        out[o] = best;
        if (argmax) (*argmax)[o] = best_idx;
      }
    }
  }
  return out;
}

Tensor maxpool2d_backward(const Tensor& grad_output, const std::vector<std::int32_t>& argmax,
                          const std::vector<int>& input_shape) {
  require(argmax.size() == grad_output.size(), "maxpool2d_backward: argmax/gradient mismatch");
  Tensor grad(input_shape);
  for (std::size_t i = 0; i < argmax.size(); ++i) grad[argmax[i]] += grad_output[i];
  return grad;
}

Tensor dense(const Tensor& input, const Tensor& weights, const Tensor& bias, Activation activation) {
  require(weights.rank() == 2, "dense: weights must be rank 2");
  const std::size_t n = input.size();
  const int m = weights.dim(1);
  require(static_cast<std::size_t>(weights.dim(0)) == n,
          "dense: input length " + std::to_string(n) + " does not match fan-in " +
              std::to_string(weights.dim(0)));
  require(bias.size() == static_cast<std::size_t>(m), "dense: bias length mismatch");
  Tensor out({m});
  float* y = out.data();
  std::copy(bias.data(), bias.data() + m, y);
  const float* x = input.data();
  const float* wt = weights.data();
  for (std::size_t i = 0; i < n; ++i) {
    const float v = x[i];
    if (v == 0.0f) continue;
    const float* row = wt + i * m;
    for (int o = 0; o < m; ++o) y[o] += v * row[o];
  }
  if (activation == Activation::kRelu) {
    for (int o = 0; o < m; ++o) y[o] = y[o] > 0.0f ? y[o] : 0.0f;
  }
  return out;
}

void dense_backward(const Tensor& input, const Tensor& output, const Tensor& grad_output,
                    const Tensor& weights, Activation activation, Tensor* grad_weights,
                    Tensor* grad_bias, Tensor* grad_input) {
  const std::size_t n = input.size();
  const int m = weights.dim(1);
  require(grad_output.size() == static_cast<std::size_t>(m), "dense_backward: gradient length");
  std::vector<float> g(grad_output.values().begin(), grad_output.values().end());
  if (activation == Activation::kRelu) {
    for (int o = 0; o < m; ++o) {
      if (!(output[o] > 0.0f)) g[o] = 0.0f;
    }
  }
  if (grad_bias) {
    for (int o = 0; o < m; ++o) (*grad_bias)[o] += g[o];
  }
  const float* x = input.data();
  const float* wt = weights.data();
  if (grad_weights) {
    float* gw = grad_weights->data();
    for (std::size_t i = 0; i < n; ++i) {
      const float v = x[i];
      if (v == 0.0f) continue;
      float* row = gw + i * m;
      for (int o = 0; o < m; ++o) row[o] += v * g[o];
    }
  }
  if (grad_input) {
    *grad_input = Tensor(input.shape());
    for (std::size_t i = 0; i < n; ++i) {
      const float* row = wt + i * m;
      float s = 0.0f;
      for (int o = 0; o < m; ++o) s += row[o] * g[o];
      (*grad_input)[i] = s;
    }
  }
}

Tensor softmax(const Tensor& logits) {
  require(!logits.empty(), "softmax: empty logits");
  const float mx = *std::max_element(logits.values().begin(), logits.values().end());
  std::vector<double> e(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    e[i] = std::exp(static_cast<double>(logits[i]) - mx);
    total += e[i];
  }
  Tensor out(logits.shape());
  for (std::size_t i = 0; i < e.size(); ++i) out[i] = static_cast<float>(e[i] / total);
  return out;
}

Tensor dropout(const Tensor& input, float rate, Mode mode, Rng* rng, std::vector<float>* scale) {
  require(rate >= 0.0f && rate < 1.0f, "dropout: rate must be in [0,1)");
  if (mode == Mode::kInference || rate == 0.0f) {
    if (scale) scale->assign(input.size(), 1.0f);
    return input;
  }
  require(rng != nullptr, "dropout: training mode needs a random stream");
  const float keep_scale = 1.0f / (1.0f - rate);
  Tensor out(input.shape());
  std::vector<float> mask(input.size());
  for (std::size_t i = 0; i < input.size(); ++i) {
    mask[i] = rng->uniform() < rate ? 0.0f : keep_scale;
    out[i] = input[i] * mask[i];
  }
  if (scale) *scale = std::move(mask);
  return out;
}

}  // namespace gradlens::nn
