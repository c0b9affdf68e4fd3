#include "odebc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "odebc/errors.hpp"
#include "odebc/parallel.hpp"
#include "odebc/rng.hpp"

namespace odebc {

namespace {

double mse(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "metric");
  require(a.size() > 0, "metric: empty tensors");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return v[i] < v[j]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

/// Coordinate-major copy of rows [begin, end): soa[k * n + i] = p[(begin + i) * dim + k].
std::vector<double> to_soa(const std::vector<double>& p, std::size_t dim, std::size_t begin,
                           std::size_t end) {
  const std::size_t n = end - begin;
  std::vector<double> soa(n * dim);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < dim; ++k) soa[k * n + i] = p[(begin + i) * dim + k];
  return soa;
}

/// sum over i < j of |p_i - p_j| for coordinate-major points, with D fixed at
/// compile time (D == 0 reads the runtime dim). Four accumulator lanes with a
/// fixed assignment keep the summation order independent of the ISA.
template <std::size_t D>
double pair_sum_soa(const std::vector<double>& soa, std::size_t n, std::size_t dim) {
  const std::size_t nd = D ? D : dim;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    auto dist = [&](std::size_t j) {
      double sq = 0.0;
      for (std::size_t k = 0; k < nd; ++k) {
        const double d = soa[k * n + j] - soa[k * n + i];
        sq += d * d;
      }
      return std::sqrt(sq);
    };
    std::size_t j = i + 1;
    for (; j + 4 <= n; j += 4)
      for (std::size_t l = 0; l < 4; ++l) acc[l] += dist(j + l);
    for (; j < n; ++j) acc[0] += dist(j);
    total += (acc[0] + acc[1]) + (acc[2] + acc[3]);
  }
  return total;
}

/// sum_{i<j} |p_i - p_j| over rows [begin, end) of a row-major point array.
double pair_sum(const std::vector<double>& p, std::size_t dim, std::size_t begin,
                std::size_t end) {
  const auto soa = to_soa(p, dim, begin, end);
  const std::size_t n = end - begin;
  switch (dim) {
    case 1: return pair_sum_soa<1>(soa, n, dim);
    case 2: return pair_sum_soa<2>(soa, n, dim);
    default: return pair_sum_soa<0>(soa, n, dim);
  }
}

/// Energy distance of the split p[0, n) vs p[n, N), given the all-pairs sum.
double energy_from_split(const std::vector<double>& p, std::size_t dim, std::size_t n,
                         std::size_t total_points, double all_pairs) {
  const std::size_t m = total_points - n;
  const double wx = pair_sum(p, dim, 0, n);
  const double wy = pair_sum(p, dim, n, total_points);
  const double cross = all_pairs - wx - wy;
  const double dn = static_cast<double>(n), dm = static_cast<double>(m);
  return 2.0 * cross / (dn * dm) - 2.0 * wx / (dn * dn) - 2.0 * wy / (dm * dm);
}

}  // namespace

double l2_distance(const Tensor& a, const Tensor& b) { return mse(a, b); }

PsnrResult psnr(const Tensor& a, const Tensor& b, double peak) {
  require(peak > 0.0, "psnr: peak must be > 0");
  const double e = mse(a, b);
  if (e == 0.0) return {std::numeric_limits<double>::infinity(), true};
  return {10.0 * std::log10(peak * peak / e), false};
}

double grad_perceptual_distance(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "grad_perceptual_distance");
  const auto& sh = a.shape();
  const std::size_t H = sh.height(), W = sh.width(), C = sh.channels();
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t r = 0; r < H; ++r)
    for (std::size_t c = 0; c < W; ++c)
      for (std::size_t ch = 0; ch < C; ++ch) {
        const std::size_t i = (r * W + c) * C + ch;
        if (c + 1 < W) {
          const std::size_t k = i + C;
          const double d = (a[k] - a[i]) - (b[k] - b[i]);
          acc += d * d;
          ++count;
        }
        if (r + 1 < H) {
          const std::size_t k = i + W * C;
          const double d = (a[k] - a[i]) - (b[k] - b[i]);
          acc += d * d;
          ++count;
        }
      }
  const double grad = count ? acc / static_cast<double>(count) : 0.0;
  return grad + 0.1 * mse(a, b);
}

double pearson_corr(std::span<const double> u, std::span<const double> v) {
  require(u.size() == v.size(), "pearson_corr: sequences differ in length");
  require(u.size() >= 2, "pearson_corr: needs at least two values");
  const double n = static_cast<double>(u.size());
  const double mu = std::accumulate(u.begin(), u.end(), 0.0) / n;
  const double mv = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double suv = 0.0, suu = 0.0, svv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double du = u[i] - mu, dv = v[i] - mv;
    suv += du * dv;
    suu += du * du;
    svv += dv * dv;
  }
  require(suu > 0.0 && svv > 0.0, "pearson_corr: constant sequence");
  return std::clamp(suv / std::sqrt(suu * svv), -1.0, 1.0);
}

double spearman_corr(std::span<const double> u, std::span<const double> v) {
  require(u.size() == v.size(), "spearman_corr: sequences differ in length");
  const auto ru = ranks(u);
  const auto rv = ranks(v);
  return pearson_corr(ru, rv);
}

DistanceMetric l2_metric() { return {"l2", l2_distance}; }

DistanceMetric grad_perceptual_metric() { return {"gradperc", grad_perceptual_distance}; }

DistanceMetric negative_psnr_metric(double peak) {
  require(peak > 0.0, "psnr: peak must be > 0");
  return {"neg_psnr", [peak](const Tensor& a, const Tensor& b) {
            const auto r = psnr(a, b, peak);
            return r.identical ? -std::numeric_limits<double>::infinity() : -r.db;
          }};
}

DistanceMetric metric_by_name(const std::string& name, double peak) {
  if (name == "l2") return l2_metric();
  if (name == "gradperc") return grad_perceptual_metric();
  if (name == "psnr") return negative_psnr_metric(peak);
  throw ValidationError("unknown metric '" + name + "' (expected l2, psnr, gradperc)");
}

MeanStd mean_std(std::span<const double> values) {
  require(!values.empty(), "mean_std: no values");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

double energy_distance(std::span<const double> xs, std::span<const double> ys, std::size_t dim) {
  require(dim >= 1, "energy distance: dim must be >= 1");
  require(xs.size() % dim == 0 && ys.size() % dim == 0,
          "energy distance: point arrays are not a multiple of dim");
  const std::size_t n = xs.size() / dim, m = ys.size() / dim;
  require(n >= 1 && m >= 1, "energy distance: both samples must be non-empty");
  std::vector<double> pooled(xs.begin(), xs.end());
  pooled.insert(pooled.end(), ys.begin(), ys.end());
  return energy_from_split(pooled, dim, n, n + m, pair_sum(pooled, dim, 0, n + m));
}

TwoSampleResult energy_test(std::span<const double> xs, std::span<const double> ys,
                            std::size_t dim, int permutations, std::uint64_t seed, int workers) {
  require(permutations >= 1, "energy test: permutations must be >= 1");
  require(dim >= 1 && xs.size() % dim == 0 && ys.size() % dim == 0,
          "energy test: point arrays are not a multiple of dim");
  const std::size_t n = xs.size() / dim, m = ys.size() / dim, N = n + m;
  require(n >= 2 && m >= 2, "energy test: each sample needs at least two points");
  std::vector<double> pooled(xs.begin(), xs.end());
  pooled.insert(pooled.end(), ys.begin(), ys.end());
  const double all_pairs = pair_sum(pooled, dim, 0, N);
  const double observed = energy_from_split(pooled, dim, n, N, all_pairs);

  std::vector<double> stats(static_cast<std::size_t>(permutations));
  parallel_for(stats.size(), workers, [&](std::size_t b) {
    rng::Generator gen(seed, rng::Stream::kVerify, b);
    std::vector<std::size_t> order(N);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = N - 1; i > 0; --i) std::swap(order[i], order[gen.below(i + 1)]);
    std::vector<double> perm(N * dim);
    for (std::size_t i = 0; i < N; ++i)
      std::copy_n(&pooled[order[i] * dim], dim, &perm[i * dim]);
    stats[b] = energy_from_split(perm, dim, n, N, all_pairs);
  });
  int at_least = 0;
  for (double s : stats)
    if (s >= observed) ++at_least;
  return {observed, (1.0 + at_least) / (1.0 + permutations), permutations};
}

}  // namespace odebc
