#include "odebc/rng.hpp"

#include <atomic>
#include <cmath>
#include <numbers>

namespace odebc::rng {

namespace {
std::atomic<std::uint64_t> g_draws{0};
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_key(std::uint64_t seed, Stream stream, std::uint64_t index) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
  return splitmix64(h ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

Generator::Generator(std::uint64_t seed, Stream stream, std::uint64_t index)
    : state_(derive_key(seed, stream, index)) {}

std::uint64_t Generator::next() {
  // splitmix64 adds the increment itself; state advances by the same constant.
  const std::uint64_t out = splitmix64(state_);
  state_ += 0x9e3779b97f4a7c15ULL;
  return out;
}

double Generator::uniform() {
  // 53 random bits, shifted off zero.
  return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
}

double Generator::normal() {
  g_draws.fetch_add(1, std::memory_order_relaxed);
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(phi);
  has_spare_ = true;
  return r * std::cos(phi);
}

void Generator::fill_normal(std::span<double> out) {
  for (double& v : out) v = normal();
}

std::uint64_t Generator::below(std::uint64_t n) {
  // Rejection keeps the result unbiased.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  for (;;) {
    const std::uint64_t v = next();
    if (v < limit) return v % n;
  }
}

std::uint64_t draw_count() { return g_draws.load(std::memory_order_relaxed); }

}  // namespace odebc::rng
