#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "odebc/data.hpp"
#include "odebc/model.hpp"

namespace odebc {

/// Draws one prior sample x0 ~ q(x0) from the generator cell (seed, stream, index).
Tensor sample_prior(const GmmWorld& world, std::uint64_t seed, std::uint64_t index);

/// n pairs with z ~ q(x0) and y = D z + tau noise; pair i depends only on (seed, i).
std::vector<ReferencePair> sample_pairs(const GmmWorld& world, std::size_t n, std::uint64_t seed);

/// Seeded shuffle, then the first round(ratio * n) pairs form the reference
/// part and the rest the holdout.
std::pair<std::vector<ReferencePair>, std::vector<ReferencePair>> split(
    const std::vector<ReferencePair>& pairs, double ratio, std::uint64_t seed);

/// Writes z_%06d.t / y_%06d.t plus manifest.csv (index,z_path,y_path,seed).
void write_pairs(const std::filesystem::path& dir, const std::vector<ReferencePair>& pairs,
                 std::uint64_t seed);
/// Reads a directory written by write_pairs, in manifest order.
std::vector<ReferencePair> read_pairs(const std::filesystem::path& dir);

}  // namespace odebc
