#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace gradlens {

// Dense row-major float array. Rank-3 tensors are laid out (height, width,
// channels), so the channel index varies fastest.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape, float fill = 0.0f);
  Tensor(std::vector<int> shape, std::vector<float> data);

  const std::vector<int>& shape() const { return shape_; }
  int dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }
  std::span<float> values() { return data_; }
  std::span<const float> values() const { return data_; }

  float& operator[](std::size_t i) { return data_[i]; }
  float operator[](std::size_t i) const { return data_[i]; }

  // Rank-3 (h, w, c) element access.
  float& at(int y, int x, int c) {
    return data_[(static_cast<std::size_t>(y) * shape_[1] + x) * shape_[2] + c];
  }
  float at(int y, int x, int c) const {
    return data_[(static_cast<std::size_t>(y) * shape_[1] + x) * shape_[2] + c];
  }

  void fill(float value);
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  bool all_finite() const;
  std::string shape_string() const;

  friend bool operator==(const Tensor& a, const Tensor& b) = default;

 private:
  std::vector<int> shape_;
  std::vector<float> data_;
};

std::size_t shape_product(const std::vector<int>& shape);

}  // namespace gradlens
