#pragma once

#include <cstdint>
#include <span>

namespace odebc::rng {

/// Stream tags keep the draws of unrelated consumers disjoint even when they
/// share a user seed.
enum class Stream : std::uint64_t {
  kCandidate = 0x43414e44ULL,
  kDdpmNoise = 0x4444504dULL,
  kPairs = 0x50414952ULL,
  kSplit = 0x53504c54ULL,
  kSubset = 0x53554253ULL,
  kModeStarts = 0x4d4f4445ULL,
  kBenchmark = 0x42454e43ULL,
  kAblation = 0x41424c54ULL,
  kVerify = 0x56455249ULL,
  kTexture = 0x54455854ULL,
  kRandomBc = 0x52424353ULL,
};

std::uint64_t splitmix64(std::uint64_t x);

/// Key for the generator at (seed, stream, index); a pure function of its inputs.
std::uint64_t derive_key(std::uint64_t seed, Stream stream, std::uint64_t index);

/// Deterministic generator for one (seed, stream, index) cell: the SplitMix64
/// sequence started at the cell key. Construction is free, so every cell gets
/// its own generator. Uniforms and normals are explicit transforms, so results
/// do not depend on the standard library's distribution implementations.
class Generator {
 public:
  Generator(std::uint64_t seed, Stream stream, std::uint64_t index);
  explicit Generator(std::uint64_t key) : state_(key) {}

  /// Uniform in the open interval (0, 1).
  double uniform();
  /// Standard normal (Box-Muller, both outputs used).
  double normal();
  void fill_normal(std::span<double> out);
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t next();

  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Total number of normal draws made by every Generator in this process.
/// Test hook used to audit that deterministic paths never draw noise.
std::uint64_t draw_count();

}  // namespace odebc::rng
