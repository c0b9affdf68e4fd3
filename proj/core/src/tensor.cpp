#include "odebc/tensor.hpp"

#include <cmath>
#include <sstream>

#include "odebc/data.hpp"
#include "odebc/errors.hpp"

namespace odebc {

std::size_t Shape::numel() const {
  if (dims.empty()) return 0;
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

std::string Shape::str() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < dims.size(); ++i) os << (i ? "," : "") << dims[i];
  os << ')';
  return os.str();
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)), values_(shape_.numel(), 0.0) {}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  require(values_.size() == shape_.numel(),
          "tensor payload has " + std::to_string(values_.size()) + " values but shape " +
              shape_.str() + " needs " + std::to_string(shape_.numel()));
}

Tensor Tensor::flat(std::vector<double> values) {
  const auto n = static_cast<std::uint32_t>(values.size());
  return Tensor(Shape::flat(n), std::move(values));
}

double& Tensor::at(std::size_t row, std::size_t col, std::size_t ch) {
  return values_[(row * shape_.width() + col) * shape_.channels() + ch];
}

double Tensor::at(std::size_t row, std::size_t col, std::size_t ch) const {
  return values_[(row * shape_.width() + col) * shape_.channels() + ch];
}

bool Tensor::all_finite() const {
  for (double v : values_)
    if (!std::isfinite(v)) return false;
  return true;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape())
    throw ValidationError(std::string(what) + ": shape mismatch " + a.shape().str() + " vs " +
                          b.shape().str());
}

void ReferenceSet::validate() const {
  require(!pairs.empty(), "reference set is empty (R must be >= 1)");
  const auto& z0 = pairs.front().z.shape();
  const auto& y0 = pairs.front().y.shape();
  for (std::size_t i = 1; i < pairs.size(); ++i) {
    require(pairs[i].z.shape() == z0,
            "reference pair " + std::to_string(i) + ": HR shape " + pairs[i].z.shape().str() +
                " differs from " + z0.str());
    require(pairs[i].y.shape() == y0,
            "reference pair " + std::to_string(i) + ": LR shape " + pairs[i].y.shape().str() +
                " differs from " + y0.str());
  }
}

ReferenceSet ReferenceSet::subset(const std::vector<std::size_t>& indices) const {
  ReferenceSet out;
  out.provenance = provenance;
  out.pairs.reserve(indices.size());
  for (auto i : indices) out.pairs.push_back(pairs.at(i));
  return out;
}

}  // namespace odebc
