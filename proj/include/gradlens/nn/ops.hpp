#pragma once

// Layer kernels. Images are (h, w, c) tensors; conv weights are
// (k, k, c_in, c_out) and dense weights are (n_in, n_out), both row-major.
// Backward kernels accumulate into the parameter-gradient tensors they are
// given, so a minibatch can be summed without temporaries.

#include <cstdint>
#include <vector>

#include "gradlens/nn/spec.hpp"
#include "gradlens/rng.hpp"
#include "gradlens/tensor.hpp"

namespace gradlens::nn {

Tensor conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias, int stride, int pad,
              Activation activation);

// `output` is the post-activation forward result, `grad_output` the gradient
// with respect to it. grad_input may be null when the caller does not need it.
void conv2d_backward(const Tensor& input, const Tensor& output, const Tensor& grad_output,
                     const Tensor& weights, int stride, int pad, Activation activation,
                     Tensor* grad_weights, Tensor* grad_bias, Tensor* grad_input);

Tensor maxpool2d(const Tensor& input, int size, int stride, std::vector<std::int32_t>* argmax);
Tensor maxpool2d_backward(const Tensor& grad_output, const std::vector<std::int32_t>& argmax,
                          const std::vector<int>& input_shape);

// Affine map on the flattened input. Softmax is not applied here; callers use
// softmax() on the returned logits.
Tensor dense(const Tensor& input, const Tensor& weights, const Tensor& bias, Activation activation);
void dense_backward(const Tensor& input, const Tensor& output, const Tensor& grad_output,
                    const Tensor& weights, Activation activation, Tensor* grad_weights,
                    Tensor* grad_bias, Tensor* grad_input);

Tensor softmax(const Tensor& logits);

enum class Mode { kInference, kTraining };

// Inverted dropout. In training mode `scale` receives the per-unit multiplier
// (0 or 1/(1-rate)); in inference mode the input is returned unchanged.
Tensor dropout(const Tensor& input, float rate, Mode mode, Rng* rng, std::vector<float>* scale);

}  // namespace gradlens::nn
