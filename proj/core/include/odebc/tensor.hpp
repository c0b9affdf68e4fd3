#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace odebc {

/// Tensor dimensions. Images use rank 3 (height, width, channels); a rank-1
/// shape is a flat vector.
struct Shape {
  std::vector<std::uint32_t> dims;

  Shape() = default;
  explicit Shape(std::vector<std::uint32_t> d) : dims(std::move(d)) {}
  static Shape image(std::uint32_t height, std::uint32_t width, std::uint32_t channels = 1) {
    return Shape({height, width, channels});
  }
  static Shape flat(std::uint32_t n) { return Shape({n}); }

  std::size_t rank() const { return dims.size(); }
  std::size_t numel() const;
  bool is_image() const { return dims.size() == 3; }
  std::uint32_t height() const { return is_image() ? dims[0] : 1; }
  std::uint32_t width() const { return is_image() ? dims[1] : static_cast<std::uint32_t>(numel()); }
  std::uint32_t channels() const { return is_image() ? dims[2] : 1; }

  std::string str() const;
  friend bool operator==(const Shape&, const Shape&) = default;
};

/// Dense row-major tensor of doubles.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor flat(std::vector<double> values);

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return values_.size(); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  const std::vector<double>& vec() const { return values_; }
  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  /// Pixel access for image tensors.
  double& at(std::size_t row, std::size_t col, std::size_t ch = 0);
  double at(std::size_t row, std::size_t col, std::size_t ch = 0) const;

  bool all_finite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double> values_;
};

/// Throws ValidationError naming `what` if the shapes differ.
void require_same_shape(const Tensor& a, const Tensor& b, const char* what);

}  // namespace odebc
