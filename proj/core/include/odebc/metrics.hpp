#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "odebc/tensor.hpp"

namespace odebc {

/// A distance M(a, b) between images. The search minimizes it.
struct DistanceMetric {
  std::string name;
  std::function<double(const Tensor&, const Tensor&)> dist;

  double operator()(const Tensor& a, const Tensor& b) const { return dist(a, b); }
};

/// Mean over elements of (a - b)^2.
double l2_distance(const Tensor& a, const Tensor& b);

struct PsnrResult {
  double db;       // +infinity when identical
  bool identical;  // mse == 0
};

/// 10 log10(peak^2 / mse).
PsnrResult psnr(const Tensor& a, const Tensor& b, double peak);

/// Mean squared difference of the forward-difference gradient fields along
/// both image axes, plus 0.1 * l2_distance.
double grad_perceptual_distance(const Tensor& a, const Tensor& b);

/// Sample Pearson coefficient. Requires n >= 2 and non-constant inputs.
double pearson_corr(std::span<const double> u, std::span<const double> v);
/// Pearson coefficient of the ranks (average ranks for ties).
double spearman_corr(std::span<const double> u, std::span<const double> v);

DistanceMetric l2_metric();
DistanceMetric grad_perceptual_metric();
/// -psnr, so lower is better; -infinity for identical images.
DistanceMetric negative_psnr_metric(double peak);
/// "l2", "gradperc" or "psnr".
DistanceMetric metric_by_name(const std::string& name, double peak = 1.0);

struct MeanStd {
  double mean;
  double stddev;  // sample standard deviation; 0 for fewer than two values
};
MeanStd mean_std(std::span<const double> values);

struct TwoSampleResult {
  double statistic;
  double p_value;
  int permutations;
};

/// Energy distance 2 E|X-Y| - E|X-X'| - E|Y-Y'| between two point sets of
/// points with `dim` coordinates each (row-major).
double energy_distance(std::span<const double> xs, std::span<const double> ys, std::size_t dim);

/// Permutation test on the energy distance. p = (1 + #{perm >= observed}) /
/// (1 + permutations).
TwoSampleResult energy_test(std::span<const double> xs, std::span<const double> ys,
                            std::size_t dim, int permutations, std::uint64_t seed, int workers);

}  // namespace odebc
