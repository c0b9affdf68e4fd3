#pragma once

// Explicit mixture densities built from dense matrices, sharing no code with
// the library's eigenbasis implementation.

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <vector>

#include "odebc/model.hpp"
#include "odebc/rng.hpp"
#include "odebc/schedule.hpp"

namespace odebc::oracle {

inline Eigen::VectorXd vec(const Tensor& t) {
  return Eigen::Map<const Eigen::VectorXd>(t.data(), static_cast<Eigen::Index>(t.size()));
}

inline Tensor tensor(const Shape& shape, const Eigen::VectorXd& v) {
  return Tensor(shape, std::vector<double>(v.data(), v.data() + v.size()));
}

/// Block-average pooling built pixel by pixel.
inline Eigen::MatrixXd pooling_matrix(const Shape& hr, std::uint32_t b) {
  const std::uint32_t H = hr.height(), W = hr.width(), C = hr.channels();
  const std::uint32_t h = H / b, w = W / b;
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(h * w * C, H * W * C);
  for (std::uint32_t r = 0; r < H; ++r)
    for (std::uint32_t c = 0; c < W; ++c)
      for (std::uint32_t ch = 0; ch < C; ++ch)
        D(((r / b) * w + c / b) * C + ch, (r * W + c) * C + ch) = 1.0 / (b * b);
  return D;
}

inline double log_normal(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                         const Eigen::MatrixXd& cov) {
  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  const Eigen::VectorXd z = llt.matrixL().solve(x - mean);
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < cov.rows(); ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
  return -0.5 * (z.squaredNorm() + logdet + static_cast<double>(x.size()) * std::log(2 * std::numbers::pi));
}

inline double log_sum_exp(const std::vector<double>& v) {
  double m = -INFINITY;
  for (double a : v) m = std::max(m, a);
  double s = 0.0;
  for (double a : v) s += std::exp(a - m);
  return m + std::log(s);
}

struct DenseComponent {
  double log_weight;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Prior mixture, or the posterior given y by dense Gaussian conditioning.
inline std::vector<DenseComponent> dense_mixture(const GmmWorld& world, const Tensor* y) {
  const auto d = static_cast<Eigen::Index>(world.dim());
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
  const Eigen::MatrixXd D = pooling_matrix(world.hr_shape(), world.block());
  std::vector<DenseComponent> out;
  for (const auto& c : world.components()) {
    const double s2 = c.stddev * c.stddev;
    const Eigen::VectorXd mu = vec(c.mean);
    if (!y) {
      out.push_back({std::log(c.weight), mu, s2 * I});
      continue;
    }
    const Eigen::MatrixXd S =
        s2 * D * D.transpose() + world.tau() * world.tau() * Eigen::MatrixXd::Identity(D.rows(), D.rows());
    const Eigen::MatrixXd K = s2 * D.transpose() * S.inverse();
    const Eigen::VectorXd yv = vec(*y);
    out.push_back({std::log(c.weight) + log_normal(yv, D * mu, S), mu + K * (yv - D * mu),
                   s2 * I - K * D * s2});
  }
  const double lz = [&] {
    std::vector<double> lw;
    for (const auto& c : out) lw.push_back(c.log_weight);
    return log_sum_exp(lw);
  }();
  for (auto& c : out) c.log_weight -= lz;
  return out;
}

/// log q_t(x) for the mixture pushed through x_t = alpha x0 + sigma noise.
inline double log_qt(const std::vector<DenseComponent>& mix, const Eigen::VectorXd& x,
                     double alpha, double sigma) {
  const auto d = x.size();
  std::vector<double> terms;
  for (const auto& c : mix)
    terms.push_back(c.log_weight + log_normal(x, alpha * c.mean,
                                              alpha * alpha * c.cov + sigma * sigma * Eigen::MatrixXd::Identity(d, d)));
  return log_sum_exp(terms);
}

/// Central-difference gradient of log_qt with step h.
inline Eigen::VectorXd fd_grad(const std::vector<DenseComponent>& mix, const Eigen::VectorXd& x,
                               double alpha, double sigma, double h) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd p = x, m = x;
    p(i) += h;
    m(i) -= h;
    g(i) = (log_qt(mix, p, alpha, sigma) - log_qt(mix, m, alpha, sigma)) / (2 * h);
  }
  return g;
}

/// World with J random components on an H x W x 1 grid, weights summing to 1.
inline GmmWorld random_world(std::uint64_t seed, std::uint32_t H, std::uint32_t W, std::uint32_t b,
                             std::size_t J, double tau = 0.1) {
  rng::Generator gen(seed, rng::Stream::kVerify, 0xA11CE);
  std::vector<double> raw(J);
  double total = 0.0;
  for (double& r : raw) total += (r = 0.5 + gen.uniform());
  std::vector<GmmComponent> comps;
  double acc = 0.0;
  for (std::size_t j = 0; j < J; ++j) {
    const double w = j + 1 == J ? 1.0 - acc : raw[j] / total;
    acc += w;
    Tensor mean(Shape::image(H, W));
    for (double& v : mean.values()) v = gen.normal() * 0.7;
    comps.push_back({w, 0.15 + 0.35 * gen.uniform(), mean});
  }
  return GmmWorld(Shape::image(H, W), b, tau, comps);
}

}  // namespace odebc::oracle
