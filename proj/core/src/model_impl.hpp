#pragma once

#include <Eigen/Dense>
#include <vector>

#include "odebc/model.hpp"

namespace odebc {

/// Precomputed linear algebra shared by every binding of a world.
///
/// D^T D = U diag(e) U^T. For isotropic prior components every posterior
/// covariance is diagonal in the same basis:
///   C_j = U diag(s_j^2 tau^2 / (s_j^2 e_i + tau^2)) U^T.
/// Eigenvectors are ordered so equal eigenvalues of D^T D form contiguous
/// groups, letting the score evaluate log-determinants per group.
struct GmmWorld::Impl {
  Shape hr;
  Shape lr;
  std::uint32_t block = 1;
  double tau = 0.0;
  std::vector<GmmComponent> components;
  std::size_t d = 0;
  std::size_t m = 0;

  Eigen::MatrixXd D;        // m x d
  Eigen::MatrixXd U;        // d x d, columns are eigenvectors of D^T D
  Eigen::MatrixXd Ut;       // U^T
  Eigen::VectorXd e;        // eigenvalues of D^T D
  struct Group {
    std::size_t begin;
    std::size_t end;
  };
  std::vector<Group> groups;
  // post_var[j][g]: posterior variance of component j along group g.
  std::vector<std::vector<double>> post_var;

  std::vector<Eigen::VectorXd> mu;
  std::vector<Eigen::VectorXd> d_mu;  // D mu_j
  std::vector<double> log_w;
  std::vector<Eigen::LDLT<Eigen::MatrixXd>> obs_cov;  // s_j^2 D D^T + tau^2 I
  std::vector<double> obs_logdet;
};

/// Posterior means and log weights only (no dense covariance).
struct PosteriorLite {
  std::vector<double> log_weight;  // normalized
  std::vector<Eigen::VectorXd> mean;
};

PosteriorLite posterior_lite(const GmmWorld::Impl& w, const Eigen::VectorXd& y);

}  // namespace odebc
