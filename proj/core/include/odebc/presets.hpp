#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "odebc/model.hpp"

namespace odebc {

/// Smooth ramp (r + c) / (H + W - 2) scaled by `amplitude`; 0 for a 1x1 image.
Tensor gradient_image(const Shape& shape, double amplitude);
Tensor constant_image(const Shape& shape, double value);
/// Alternating +-amplitude over single pixels.
Tensor checker_image(const Shape& shape, double amplitude);
/// Seeded normal field smoothed by a 3x3 box filter (clamped at the border),
/// rescaled to the given per-pixel root mean square.
Tensor smooth_noise_image(const Shape& shape, double rms, std::uint64_t seed, std::uint64_t index);
/// Seeded pattern whose every block x block tile averages to zero per
/// channel, rescaled to the given per-pixel root mean square. Invisible to
/// block pooling.
Tensor detail_pattern(const Shape& shape, std::uint32_t block, double rms, std::uint64_t seed,
                      std::uint64_t index);

/// Named worlds:
///   toy2   (1x2x1, block 1)  three components, for density checks
///   toy8   (2x4x1, block 2)  three components, for solver convergence
///   gauss8 (8x8x1, block 2)  one component (log-concave posterior)
///   sr8    (8x8x1, block 2)  a smooth base image plus 32 textured variants
///                            with identical block averages
///   sr16   (16x16x1, block 2) as sr8 at 16x16
/// `seed` drives the texture patterns of sr8 and sr16.
GmmWorld make_preset_world(const std::string& name, std::uint64_t seed = 7);
std::vector<std::string> preset_names();

/// Display range for renders: component means widened by 3 standard deviations.
std::pair<double, double> value_range(const GmmWorld& world);

}  // namespace odebc
