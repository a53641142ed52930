#include "krescale/tensor.hpp"

#include <cmath>
#include <cstring>

#include "krescale/error.hpp"

namespace krescale {

std::size_t element_count(const Shape& shape) noexcept {
  std::size_t count = 1;
  for (std::size_t extent : shape) count *= extent;
  return count;
}

Shape row_major_strides(const Shape& shape) {
  Shape strides(shape.size(), 1);
  for (std::size_t axis = shape.size(); axis-- > 1;) {
    strides[axis - 1] = strides[axis] * shape[axis];
  }
  return strides;
}

std::string shape_to_string(const Shape& shape) {
  std::string out;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i != 0) out += 'x';
    out += std::to_string(shape[i]);
  }
  return out;
}

void check_shape(const Shape& shape) {
  if (shape.empty() || shape.size() > kMaxRank) {
    throw Error(ErrorCode::BadRank, "rank " + std::to_string(shape.size()) + " outside [1, 4]");
  }
  for (std::size_t extent : shape) {
    if (extent < 1) throw Error(ErrorCode::EmptyShape, "shape " + shape_to_string(shape) + " has a zero extent");
  }
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  check_shape(shape_);
  if (data_.size() != element_count(shape_)) {
    throw Error(ErrorCode::ShapeMismatch, "shape " + shape_to_string(shape_) + " needs " +
                                              std::to_string(element_count(shape_)) + " values, got " +
                                              std::to_string(data_.size()));
  }
  for (double v : data_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "tensor payload contains NaN or Inf");
  }
}

Tensor Tensor::zeros(Shape shape) { return filled(std::move(shape), 0.0); }

Tensor Tensor::filled(Shape shape, double value) {
  check_shape(shape);
  const std::size_t n = element_count(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value));
}

double Tensor::at(std::span<const std::size_t> index) const {
  if (index.size() != shape_.size()) {
    throw Error(ErrorCode::IndexOutOfRange, "index of rank " + std::to_string(index.size()) +
                                                " into tensor of rank " + std::to_string(shape_.size()));
  }
  std::size_t flat = 0;
  for (std::size_t axis = 0; axis < index.size(); ++axis) {
    if (index[axis] >= shape_[axis]) {
      throw Error(ErrorCode::IndexOutOfRange, "index " + std::to_string(index[axis]) + " on axis " +
                                                  std::to_string(axis) + " of shape " + shape_to_string(shape_));
    }
    flat = flat * shape_[axis] + index[axis];
  }
  return data_[flat];
}

Tensor Tensor::reshaped(Shape shape) const { return Tensor(std::move(shape), data_); }

bool Tensor::identical(const Tensor& other) const noexcept {
  return shape_ == other.shape_ &&
         std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(double)) == 0;
}

ComplexGrid::ComplexGrid(Shape shape, std::vector<double> re, std::vector<double> im)
    : shape_(std::move(shape)), re_(std::move(re)), im_(std::move(im)) {
  check_shape(shape_);
  const std::size_t n = element_count(shape_);
  if (re_.size() != n || im_.size() != n) {
    throw Error(ErrorCode::ShapeMismatch, "complex grid " + shape_to_string(shape_) + " has mismatched planes");
  }
}

}  // namespace krescale
