#pragma once

#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "raytraj/errors.hpp"

namespace raytraj {

using Shape = std::vector<std::size_t>;

inline std::size_t element_count(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

inline std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? ", " : "") << shape[i];
  os << ')';
  return os.str();
}

/// Dense row-major float32 array.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(Shape shape, float fill = 0.0f)
      : shape_(std::move(shape)), data_(element_count(shape_), fill) {}

  Tensor(Shape shape, std::vector<float> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != element_count(shape_)) {
      throw Error(Errc::ShapeMismatch, "buffer of " + std::to_string(data_.size()) +
                                           " elements does not match shape " + to_string(shape_));
    }
  }

  [[nodiscard]] const Shape& shape() const { return shape_; }
  [[nodiscard]] std::size_t rank() const { return shape_.size(); }
  [[nodiscard]] std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  [[nodiscard]] std::size_t size() const { return data_.size(); }

  [[nodiscard]] std::span<float> data() { return data_; }
  [[nodiscard]] std::span<const float> data() const { return data_; }
  [[nodiscard]] std::vector<float>& buffer() { return data_; }
  [[nodiscard]] const std::vector<float>& buffer() const { return data_; }

  float& operator[](std::size_t i) { return data_[i]; }
  float operator[](std::size_t i) const { return data_[i]; }

  /// Row-major flat offset of a multi-index.
  [[nodiscard]] std::size_t offset(std::initializer_list<std::size_t> index) const {
    std::size_t off = 0;
    std::size_t axis = 0;
    for (std::size_t i : index) off = off * shape_[axis++] + i;
    return off;
  }

  float& at(std::initializer_list<std::size_t> index) { return data_[offset(index)]; }
  [[nodiscard]] float at(std::initializer_list<std::size_t> index) const { return data_[offset(index)]; }

  /// Same data, new shape with the same element count.
  [[nodiscard]] Tensor reshaped(Shape shape) const& { return Tensor(std::move(shape), data_); }
  [[nodiscard]] Tensor reshaped(Shape shape) && { return Tensor(std::move(shape), std::move(data_)); }

 private:
  Shape shape_{0};
  std::vector<float> data_;
};

}  // namespace raytraj
