#pragma once

#include <string>
#include <vector>

#include "odebc/tensor.hpp"

namespace odebc {

/// One HR image z with its degraded observation y.
struct ReferencePair {
  Tensor z;
  Tensor y;
};

/// The R pairs that score candidate boundary conditions.
struct ReferenceSet {
  std::vector<ReferencePair> pairs;
  std::string provenance;  // generator seed or source directory

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }

  /// Throws ValidationError unless R >= 1 and all z (and all y) share a shape.
  void validate() const;
  /// The pairs at the given indices, in the given order.
  ReferenceSet subset(const std::vector<std::size_t>& indices) const;
};

}  // namespace odebc
