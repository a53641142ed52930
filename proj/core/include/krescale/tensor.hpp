#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace krescale {

using Shape = std::vector<std::size_t>;

inline constexpr std::size_t kMaxRank = 4;

// Product of the extents; 1 for an empty shape.
std::size_t element_count(const Shape& shape) noexcept;

// Row-major strides, outermost first.
Shape row_major_strides(const Shape& shape);

std::string shape_to_string(const Shape& shape);

// Throws EmptyShape / BadRank unless 1 <= rank <= 4 and every extent >= 1.
void check_shape(const Shape& shape);

// Dense row-major tensor of doubles. Immutable once constructed: every
// operation in the library builds a fresh std::vector and moves it in.
class Tensor {
 public:
  Tensor(Shape shape, std::vector<double> data);

  static Tensor zeros(Shape shape);
  static Tensor filled(Shape shape, double value);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<const double> data() const noexcept { return data_; }
  double operator[](std::size_t flat) const noexcept { return data_[flat]; }

  // Unchecked multi-index access; the index count must equal rank().
  template <typename... Idx>
  double operator()(Idx... idx) const noexcept {
    static_assert(sizeof...(Idx) >= 1 && sizeof...(Idx) <= kMaxRank);
    const std::size_t index[] = {static_cast<std::size_t>(idx)...};
    std::size_t flat = 0;
    for (std::size_t axis = 0; axis < sizeof...(Idx); ++axis) {
      flat = flat * shape_[axis] + index[axis];
    }
    return data_[flat];
  }

  // Bounds-checked access; throws IndexOutOfRange.
  double at(std::span<const std::size_t> index) const;
  double at(std::initializer_list<std::size_t> index) const {
    return at(std::span<const std::size_t>(index.begin(), index.size()));
  }

  // Same data, new shape with the same element count.
  Tensor reshaped(Shape shape) const;

  // Bitwise comparison of shape and payload.
  bool identical(const Tensor& other) const noexcept;

  std::vector<double> release() && { return std::move(data_); }

 private:
  Shape shape_;
  std::vector<double> data_;
};

// Complex-valued grid, stored as split real/imaginary planes.
class ComplexGrid {
 public:
  ComplexGrid(Shape shape, std::vector<double> re, std::vector<double> im);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return re_.size(); }
  std::span<const double> re() const noexcept { return re_; }
  std::span<const double> im() const noexcept { return im_; }

  std::complex<double> operator[](std::size_t flat) const noexcept { return {re_[flat], im_[flat]}; }

 private:
  Shape shape_;
  std::vector<double> re_;
  std::vector<double> im_;
};

}  // namespace krescale
