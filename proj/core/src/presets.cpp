#include "odebc/presets.hpp"

#include <algorithm>
#include <cmath>

#include "odebc/errors.hpp"
#include "odebc/rng.hpp"

namespace odebc {

Tensor gradient_image(const Shape& shape, double amplitude) {
  Tensor t(shape);
  const std::size_t H = shape.height(), W = shape.width(), C = shape.channels();
  const double span = static_cast<double>(H + W) - 2.0;
  for (std::size_t r = 0; r < H; ++r)
    for (std::size_t c = 0; c < W; ++c)
      for (std::size_t ch = 0; ch < C; ++ch)
        t[(r * W + c) * C + ch] = span > 0 ? amplitude * static_cast<double>(r + c) / span : 0.0;
  return t;
}

Tensor constant_image(const Shape& shape, double value) {
  return Tensor(shape, std::vector<double>(shape.numel(), value));
}

Tensor checker_image(const Shape& shape, double amplitude) {
  Tensor t(shape);
  const std::size_t H = shape.height(), W = shape.width(), C = shape.channels();
  for (std::size_t r = 0; r < H; ++r)
    for (std::size_t c = 0; c < W; ++c)
      for (std::size_t ch = 0; ch < C; ++ch)
        t[(r * W + c) * C + ch] = ((r + c) % 2 == 0) ? amplitude : -amplitude;
  return t;
}

namespace {

void rescale_rms(Tensor& t, double rms) {
  double ss = 0.0;
  for (double v : t.values()) ss += v * v;
  if (ss == 0.0) return;
  const double scale = rms / std::sqrt(ss / static_cast<double>(t.size()));
  for (double& v : t.values()) v *= scale;
}

}  // namespace

Tensor smooth_noise_image(const Shape& shape, double rms, std::uint64_t seed, std::uint64_t index) {
  Tensor raw(shape);
  rng::Generator gen(seed, rng::Stream::kTexture, index);
  gen.fill_normal(raw.values());
  Tensor t(shape);
  const long H = shape.height(), W = shape.width(), C = shape.channels();
  for (long r = 0; r < H; ++r)
    for (long c = 0; c < W; ++c)
      for (long ch = 0; ch < C; ++ch) {
        double acc = 0.0;
        int n = 0;
        for (long dr = -1; dr <= 1; ++dr)
          for (long dc = -1; dc <= 1; ++dc) {
            const long rr = r + dr, cc = c + dc;
            if (rr < 0 || rr >= H || cc < 0 || cc >= W) continue;
            acc += raw[static_cast<std::size_t>((rr * W + cc) * C + ch)];
            ++n;
          }
        t[static_cast<std::size_t>((r * W + c) * C + ch)] = acc / n;
      }
  rescale_rms(t, rms);
  return t;
}

Tensor detail_pattern(const Shape& shape, std::uint32_t block, double rms, std::uint64_t seed,
                      std::uint64_t index) {
  require(block >= 1 && shape.height() % block == 0 && shape.width() % block == 0,
          "detail pattern: shape is not divisible by the block size");
  require(block * block >= 2, "detail pattern: block must contain at least two pixels");
  Tensor t(shape);
  rng::Generator gen(seed, rng::Stream::kTexture, index);
  gen.fill_normal(t.values());
  const std::size_t W = shape.width(), C = shape.channels();
  for (std::size_t br = 0; br < shape.height(); br += block)
    for (std::size_t bc = 0; bc < W; bc += block)
      for (std::size_t ch = 0; ch < C; ++ch) {
        double mean = 0.0;
        for (std::size_t i = 0; i < block; ++i)
          for (std::size_t j = 0; j < block; ++j) mean += t[((br + i) * W + bc + j) * C + ch];
        mean /= block * block;
        for (std::size_t i = 0; i < block; ++i)
          for (std::size_t j = 0; j < block; ++j) t[((br + i) * W + bc + j) * C + ch] -= mean;
      }
  rescale_rms(t, rms);
  return t;
}

namespace {

constexpr int kDetailComponents = 32;
constexpr double kFlatWeight = 0.25;

GmmWorld texture_world(std::uint32_t side, std::uint64_t seed) {
  const Shape hr = Shape::image(side, side, 1);
  constexpr std::uint32_t kBlock = 2;
  const Tensor base = gradient_image(hr, 1.0);
  std::vector<GmmComponent> comps;
  comps.push_back({kFlatWeight, 0.1, base});
  const double w = (1.0 - kFlatWeight) / kDetailComponents;
  for (int j = 0; j < kDetailComponents; ++j) {
    Tensor mean = detail_pattern(hr, kBlock, 0.25, seed, static_cast<std::uint64_t>(j));
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += base[i];
    comps.push_back({w, 0.1, std::move(mean)});
  }
  return GmmWorld(hr, kBlock, 0.05, std::move(comps));
}

}  // namespace

GmmWorld make_preset_world(const std::string& name, std::uint64_t seed) {
  if (name == "toy2") {
    const Shape hr = Shape::image(1, 2, 1);
    return GmmWorld(hr, 1, 0.05,
                    {{0.3, 0.3, Tensor(hr, {-1.0, 0.5})},
                     {0.5, 0.2, Tensor(hr, {1.0, 1.0})},
                     {0.2, 0.25, Tensor(hr, {0.5, -1.0})}});
  }
  if (name == "toy8") {
    const Shape hr = Shape::image(2, 4, 1);
    return GmmWorld(hr, 2, 0.05,
                    {{0.3, 0.2, gradient_image(hr, 1.0)},
                     {0.45, 0.15, constant_image(hr, -0.5)},
                     {0.25, 0.3, checker_image(hr, 0.8)}});
  }
  if (name == "gauss8") {
    const Shape hr = Shape::image(8, 8, 1);
    return GmmWorld(hr, 2, 0.05, {{1.0, 0.2, gradient_image(hr, 1.0)}});
  }
  if (name == "sr8") return texture_world(8, seed);
  if (name == "sr16") return texture_world(16, seed);
  throw ValidationError("unknown world preset '" + name +
                        "' (expected toy2, toy8, gauss8, sr8, sr16)");
}

std::vector<std::string> preset_names() { return {"toy2", "toy8", "gauss8", "sr8", "sr16"}; }

std::pair<double, double> value_range(const GmmWorld& world) {
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& c : world.components()) {
    const auto [mn, mx] = std::minmax_element(c.mean.values().begin(), c.mean.values().end());
    lo = std::min(lo, *mn - 3.0 * c.stddev);
    hi = std::max(hi, *mx + 3.0 * c.stddev);
  }
  return {lo, hi};
}

}  // namespace odebc
