#include "odebc/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "model_impl.hpp"
#include "odebc/errors.hpp"
#include "odebc/rng.hpp"

namespace odebc {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;
// Responsibilities below exp(-745) are flushed to zero.
constexpr double kLogFloor = -745.0;

Eigen::Map<const Eigen::VectorXd> as_vec(std::span<const double> v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

double log_sum_exp(const std::vector<double>& l) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : l) mx = std::max(mx, v);
  if (!std::isfinite(mx)) return mx;
  double acc = 0.0;
  for (double v : l) acc += std::exp(v - mx);
  return mx + std::log(acc);
}

void responsibilities(std::vector<double>& l) {
  const double lse = log_sum_exp(l);
  for (double& v : l) {
    const double r = v - lse;
    v = r < kLogFloor ? 0.0 : std::exp(r);
  }
}

/// Per-thread buffers so score evaluations do not allocate.
struct Scratch {
  std::vector<double> l;
  std::vector<double> var;
  Eigen::VectorXd xt;
  Eigen::VectorXd g;
  Eigen::MatrixXd resid;
};

Scratch& scratch() {
  thread_local Scratch s;
  return s;
}

class ZeroField final : public NoiseField {
 public:
  void eps(std::span<const double>, double, std::span<double> out) const override {
    std::fill(out.begin(), out.end(), 0.0);
  }
};

class ZeroDenoiser final : public Denoiser {
 public:
  std::unique_ptr<NoiseField> bind(const Condition&) const override {
    return std::make_unique<ZeroField>();
  }
};

class LinearField final : public NoiseField {
 public:
  LinearField(const std::vector<double>& a, std::size_t dim) : a_(a), dim_(dim) {}
  void eps(std::span<const double> x, double, std::span<double> out) const override {
    require(x.size() == dim_ && out.size() == dim_, "linear denoiser: dimension mismatch");
    for (std::size_t i = 0; i < dim_; ++i) {
      double acc = 0.0;
      for (std::size_t k = 0; k < dim_; ++k) acc += a_[i * dim_ + k] * x[k];
      out[i] = acc;
    }
  }

 private:
  const std::vector<double>& a_;
  std::size_t dim_;
};

class LinearDenoiser final : public Denoiser {
 public:
  LinearDenoiser(std::vector<double> a, std::size_t dim) : a_(std::move(a)), dim_(dim) {
    require(a_.size() == dim * dim, "linear denoiser: matrix must be dim x dim");
  }
  std::unique_ptr<NoiseField> bind(const Condition&) const override {
    return std::make_unique<LinearField>(a_, dim_);
  }

 private:
  std::vector<double> a_;
  std::size_t dim_;
};

/// Score of the prior mixture at noise level t: components N(a mu_j, (a^2 s_j^2 + sg^2) I).
class UnconditionalField final : public NoiseField {
 public:
  UnconditionalField(std::shared_ptr<const GmmWorld::Impl> w, DiscreteSchedule s)
      : w_(std::move(w)), s_(std::move(s)) {}

  void eps(std::span<const double> x, double t, std::span<double> out) const override {
    const auto& w = *w_;
    require(x.size() == w.d && out.size() == w.d, "eps: state dimension mismatch");
    const auto c = s_.at(t);
    const auto xv = as_vec(x);
    const std::size_t J = w.components.size();
    auto& sc = scratch();
    auto& l = sc.l;
    auto& var = sc.var;
    l.resize(J);
    var.resize(J);
    for (std::size_t j = 0; j < J; ++j) {
      const double sj = w.components[j].stddev;
      var[j] = c.alpha * c.alpha * sj * sj + c.sigma * c.sigma;
      const double q = (xv - c.alpha * w.mu[j]).squaredNorm();
      l[j] = w.log_w[j] - 0.5 * (q / var[j] + static_cast<double>(w.d) * std::log(var[j]));
    }
    responsibilities(l);
    Eigen::Map<Eigen::VectorXd> o(out.data(), static_cast<Eigen::Index>(w.d));
    o.setZero();
    for (std::size_t j = 0; j < J; ++j) {
      if (l[j] == 0.0) continue;
      o += (l[j] / var[j]) * (xv - c.alpha * w.mu[j]);
    }
    o *= c.sigma;
  }

 private:
  std::shared_ptr<const GmmWorld::Impl> w_;
  DiscreteSchedule s_;
};

/// Score of q_t(x | y): components N(a m_j, a^2 C_j + sg^2 I), evaluated in
/// the eigenbasis shared by all C_j.
class ConditionalField final : public NoiseField {
 public:
  ConditionalField(std::shared_ptr<const GmmWorld::Impl> w, DiscreteSchedule s,
                   const Eigen::VectorXd& y)
      : w_(std::move(w)), s_(std::move(s)) {
    auto post = posterior_lite(*w_, y);
    log_weight_ = std::move(post.log_weight);
    rotated_means_.resize(static_cast<Eigen::Index>(w_->d),
                          static_cast<Eigen::Index>(w_->components.size()));
    for (std::size_t j = 0; j < post.mean.size(); ++j)
      rotated_means_.col(static_cast<Eigen::Index>(j)).noalias() = w_->Ut * post.mean[j];
  }

  void eps(std::span<const double> x, double t, std::span<double> out) const override {
    const auto& w = *w_;
    require(x.size() == w.d && out.size() == w.d, "eps: state dimension mismatch");
    const auto c = s_.at(t);
    const double a2 = c.alpha * c.alpha;
    const double s2 = c.sigma * c.sigma;
    const std::size_t J = w.components.size();
    const std::size_t G = w.groups.size();
    auto& sc = scratch();
    auto& xt = sc.xt;
    xt.noalias() = w.Ut * as_vec(x);
    auto& l = sc.l;
    l.resize(J);
    auto& resid = sc.resid;
    resid.resize(static_cast<Eigen::Index>(w.d), static_cast<Eigen::Index>(J));
    auto& inv_var = sc.var;
    inv_var.resize(J * G);
    for (std::size_t j = 0; j < J; ++j) {
      auto r = resid.col(static_cast<Eigen::Index>(j));
      r = xt - c.alpha * rotated_means_.col(static_cast<Eigen::Index>(j));
      double quad = 0.0;
      double logdet = 0.0;
      for (std::size_t g = 0; g < G; ++g) {
        const auto& grp = w.groups[g];
        const double v = a2 * w.post_var[j][g] + s2;
        const auto n = static_cast<Eigen::Index>(grp.end - grp.begin);
        quad += r.segment(static_cast<Eigen::Index>(grp.begin), n).squaredNorm() / v;
        logdet += static_cast<double>(n) * std::log(v);
        inv_var[j * G + g] = 1.0 / v;
      }
      l[j] = log_weight_[j] - 0.5 * (quad + logdet);
    }
    responsibilities(l);
    auto& g_rot = sc.g;
    g_rot.setZero(static_cast<Eigen::Index>(w.d));
    for (std::size_t j = 0; j < J; ++j) {
      if (l[j] == 0.0) continue;
      for (std::size_t g = 0; g < G; ++g) {
        const auto& grp = w.groups[g];
        const auto n = static_cast<Eigen::Index>(grp.end - grp.begin);
        const auto b = static_cast<Eigen::Index>(grp.begin);
        g_rot.segment(b, n) += (l[j] * inv_var[j * G + g]) * resid.col(static_cast<Eigen::Index>(j)).segment(b, n);
      }
    }
    Eigen::Map<Eigen::VectorXd> o(out.data(), static_cast<Eigen::Index>(w.d));
    o.noalias() = w.U * g_rot;
    o *= c.sigma;
  }

 private:
  std::shared_ptr<const GmmWorld::Impl> w_;
  DiscreteSchedule s_;
  std::vector<double> log_weight_;
  Eigen::MatrixXd rotated_means_;
};

Eigen::VectorXd to_eigen(const Tensor& t) {
  return Eigen::Map<const Eigen::VectorXd>(t.data(), static_cast<Eigen::Index>(t.size()));
}

Tensor from_eigen(const Shape& shape, const Eigen::VectorXd& v) {
  return Tensor(shape, std::vector<double>(v.data(), v.data() + v.size()));
}

void check_lr(const GmmWorld::Impl& w, const Tensor& y) {
  require(y.size() == w.m, "LR tensor has " + std::to_string(y.size()) +
                               " values, world expects " + std::to_string(w.m) + " " +
                               w.lr.str());
}

}  // namespace

// ---------------------------------------------------------------------------

Condition Condition::observed(Tensor y) {
  Condition c;
  c.y_ = std::make_shared<const Tensor>(std::move(y));
  return c;
}

const Tensor& Condition::lr() const {
  if (!y_) throw ValidationError("blank condition has no LR image");
  return *y_;
}

Tensor Denoiser::eps(const Tensor& x, const Condition& c, double t) const {
  Tensor out(x.shape());
  bind(c)->eps(x.values(), t, out.values());
  return out;
}

std::unique_ptr<Denoiser> zero_denoiser() { return std::make_unique<ZeroDenoiser>(); }

std::unique_ptr<Denoiser> linear_denoiser(std::vector<double> matrix, std::size_t dim) {
  return std::make_unique<LinearDenoiser>(std::move(matrix), dim);
}

// ---------------------------------------------------------------------------

GmmWorld::GmmWorld(Shape hr_shape, std::uint32_t block, double tau,
                   std::vector<GmmComponent> components) {
  auto w = std::make_shared<Impl>();
  require(hr_shape.is_image(), "world HR shape must be (height, width, channels), got " +
                                   hr_shape.str());
  require(block >= 1, "world block size must be >= 1");
  require(hr_shape.height() % block == 0 && hr_shape.width() % block == 0,
          "world HR shape " + hr_shape.str() + " is not divisible by block " +
              std::to_string(block));
  require(tau > 0.0 && std::isfinite(tau), "world tau must be > 0");
  require(!components.empty(), "world needs at least one component");
  double wsum = 0.0;
  for (std::size_t j = 0; j < components.size(); ++j) {
    const auto& c = components[j];
    const std::string tag = "world component " + std::to_string(j);
    require(c.weight > 0.0, tag + ": weight must be > 0");
    require(c.stddev > 0.0 && std::isfinite(c.stddev), tag + ": std must be > 0");
    require(c.mean.size() == hr_shape.numel(),
            tag + ": mean has " + std::to_string(c.mean.size()) + " values, expected " +
                std::to_string(hr_shape.numel()));
    require(c.mean.all_finite(), tag + ": mean is not finite");
    wsum += c.weight;
  }
  require(std::abs(wsum - 1.0) <= 1e-12,
          "world component weights must sum to 1, got " + std::to_string(wsum));

  w->hr = hr_shape;
  w->lr = Shape::image(hr_shape.height() / block, hr_shape.width() / block, hr_shape.channels());
  w->block = block;
  w->tau = tau;
  w->d = hr_shape.numel();
  w->m = w->lr.numel();
  for (auto& c : components) c.mean = Tensor(hr_shape, c.mean.vec());
  w->components = std::move(components);

  const auto d = static_cast<Eigen::Index>(w->d);
  const auto m = static_cast<Eigen::Index>(w->m);
  const std::uint32_t H = hr_shape.height(), W = hr_shape.width(), C = hr_shape.channels();
  const std::uint32_t w_lr = W / block;
  w->D = Eigen::MatrixXd::Zero(m, d);
  const double inv_area = 1.0 / (static_cast<double>(block) * block);
  for (std::uint32_t r = 0; r < H; ++r)
    for (std::uint32_t col = 0; col < W; ++col)
      for (std::uint32_t ch = 0; ch < C; ++ch) {
        const std::size_t hi = (static_cast<std::size_t>(r) * W + col) * C + ch;
        const std::size_t lo = (static_cast<std::size_t>(r / block) * w_lr + col / block) * C + ch;
        w->D(static_cast<Eigen::Index>(lo), static_cast<Eigen::Index>(hi)) = inv_area;
      }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(w->D.transpose() * w->D);
  require(eig.info() == Eigen::Success, "world: eigendecomposition of D^T D failed");
  w->U = eig.eigenvectors();
  w->e = eig.eigenvalues();  // ascending, so equal values are adjacent
  for (Eigen::Index i = 0; i < d; ++i) {
    if (w->e(i) < 0.0) w->e(i) = 0.0;
    if (w->groups.empty() || std::abs(w->e(i) - w->e(static_cast<Eigen::Index>(w->groups.back().begin))) > 1e-9)
      w->groups.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(i) + 1});
    else
      w->groups.back().end = static_cast<std::size_t>(i) + 1;
  }
  // Snap each group to one eigenvalue so the spectral form is exact per group.
  for (const auto& g : w->groups) {
    const double v = w->e(static_cast<Eigen::Index>(g.begin));
    for (std::size_t i = g.begin; i < g.end; ++i) w->e(static_cast<Eigen::Index>(i)) = v;
  }
  w->Ut = w->U.transpose();

  const double tau2 = tau * tau;
  const Eigen::MatrixXd DDt = w->D * w->D.transpose();
  for (const auto& c : w->components) {
    const double s2 = c.stddev * c.stddev;
    std::vector<double> pv;
    for (const auto& g : w->groups) {
      const double ev = w->e(static_cast<Eigen::Index>(g.begin));
      pv.push_back(s2 * tau2 / (s2 * ev + tau2));
    }
    w->post_var.push_back(std::move(pv));
    w->mu.push_back(to_eigen(c.mean));
    w->d_mu.push_back(w->D * w->mu.back());
    w->log_w.push_back(std::log(c.weight));
    Eigen::MatrixXd S = s2 * DDt;
    S.diagonal().array() += tau2;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
    require(ldlt.info() == Eigen::Success, "world: observation covariance is singular");
    w->obs_logdet.push_back(ldlt.vectorD().array().log().sum());
    w->obs_cov.push_back(std::move(ldlt));
  }
  impl_ = std::move(w);
}

const Shape& GmmWorld::hr_shape() const { return impl_->hr; }
Shape GmmWorld::lr_shape() const { return impl_->lr; }
std::size_t GmmWorld::dim() const { return impl_->d; }
std::size_t GmmWorld::lr_dim() const { return impl_->m; }
std::uint32_t GmmWorld::block() const { return impl_->block; }
double GmmWorld::tau() const { return impl_->tau; }
std::span<const GmmComponent> GmmWorld::components() const { return impl_->components; }

Tensor GmmWorld::degrade(const Tensor& x) const {
  require(x.size() == impl_->d, "degrade: HR tensor has wrong size");
  return from_eigen(impl_->lr, impl_->D * to_eigen(x));
}

std::vector<double> GmmWorld::degradation_matrix() const {
  std::vector<double> out(impl_->m * impl_->d);
  for (std::size_t r = 0; r < impl_->m; ++r)
    for (std::size_t c = 0; c < impl_->d; ++c)
      out[r * impl_->d + c] = impl_->D(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  return out;
}

std::vector<double> GmmWorld::prior_mean() const {
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(impl_->d));
  for (std::size_t j = 0; j < impl_->components.size(); ++j)
    mean += impl_->components[j].weight * impl_->mu[j];
  return {mean.data(), mean.data() + mean.size()};
}

std::vector<double> GmmWorld::prior_covariance() const {
  const auto d = static_cast<Eigen::Index>(impl_->d);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t j = 0; j < impl_->components.size(); ++j) {
    const auto& c = impl_->components[j];
    mean += c.weight * impl_->mu[j];
    second += c.weight * (impl_->mu[j] * impl_->mu[j].transpose());
    second.diagonal().array() += c.weight * c.stddev * c.stddev;
  }
  const Eigen::MatrixXd cov = second - mean * mean.transpose();
  std::vector<double> out(static_cast<std::size_t>(d * d));
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c < d; ++c) out[static_cast<std::size_t>(r * d + c)] = cov(r, c);
  return out;
}

// ---------------------------------------------------------------------------

PosteriorLite posterior_lite(const GmmWorld::Impl& w, const Eigen::VectorXd& y) {
  PosteriorLite out;
  const std::size_t J = w.components.size();
  out.log_weight.resize(J);
  out.mean.resize(J);
  for (std::size_t j = 0; j < J; ++j) {
    const double s2 = w.components[j].stddev * w.components[j].stddev;
    const Eigen::VectorXd resid = y - w.d_mu[j];
    const Eigen::VectorXd sol = w.obs_cov[j].solve(resid);
    out.mean[j] = w.mu[j] + s2 * (w.D.transpose() * sol);
    out.log_weight[j] = w.log_w[j] - 0.5 * (resid.dot(sol) + w.obs_logdet[j] +
                                             static_cast<double>(w.m) * kLog2Pi);
  }
  const double lse = log_sum_exp(out.log_weight);
  for (double& l : out.log_weight) l -= lse;
  return out;
}

PosteriorGmm conditional_posterior(const GmmWorld& world, const Tensor& y) {
  const auto& w = world.impl();
  check_lr(w, y);
  const auto lite = posterior_lite(w, to_eigen(y));
  PosteriorGmm post;
  const auto d = static_cast<Eigen::Index>(w.d);
  for (std::size_t j = 0; j < w.components.size(); ++j) {
    const double s2 = w.components[j].stddev * w.components[j].stddev;
    Eigen::MatrixXd C = -s2 * s2 * (w.D.transpose() * w.obs_cov[j].solve(w.D));
    C.diagonal().array() += s2;
    PosteriorComponent pc;
    pc.log_weight = lite.log_weight[j];
    pc.weight = std::exp(lite.log_weight[j]);
    pc.mean = from_eigen(w.hr, lite.mean[j]);
    pc.covariance.resize(static_cast<std::size_t>(d * d));
    for (Eigen::Index r = 0; r < d; ++r)
      for (Eigen::Index c = 0; c < d; ++c)
        pc.covariance[static_cast<std::size_t>(r * d + c)] = C(r, c);
    post.components.push_back(std::move(pc));
  }
  return post;
}

Tensor eps_conditional(const GmmWorld& world, const Tensor& x_t, const Tensor& y, double t,
                       const DiscreteSchedule& s) {
  return GmmDenoiser(world, s).eps(x_t, Condition::observed(y), t);
}

Tensor eps_unconditional(const GmmWorld& world, const Tensor& x_t, double t,
                         const DiscreteSchedule& s) {
  return GmmDenoiser(world, s).eps(x_t, Condition::blank(), t);
}

namespace {

/// Per-component log N(x; m_j, C_j) + log w^_j and rotated residuals U^T (x - m_j).
struct PosteriorEval {
  std::vector<double> log_terms;
  std::vector<Eigen::VectorXd> rotated_resid;
};

PosteriorEval eval_posterior(const GmmWorld::Impl& w, const PosteriorLite& post,
                             const Eigen::VectorXd& x) {
  PosteriorEval ev;
  const std::size_t J = w.components.size();
  ev.log_terms.resize(J);
  ev.rotated_resid.resize(J);
  for (std::size_t j = 0; j < J; ++j) {
    ev.rotated_resid[j] = w.Ut * (x - post.mean[j]);
    double quad = 0.0, logdet = 0.0;
    for (std::size_t g = 0; g < w.groups.size(); ++g) {
      const auto& grp = w.groups[g];
      const auto n = static_cast<Eigen::Index>(grp.end - grp.begin);
      const double v = w.post_var[j][g];
      quad += ev.rotated_resid[j].segment(static_cast<Eigen::Index>(grp.begin), n).squaredNorm() / v;
      logdet += static_cast<double>(n) * std::log(v);
    }
    ev.log_terms[j] =
        post.log_weight[j] - 0.5 * (quad + logdet + static_cast<double>(w.d) * kLog2Pi);
  }
  return ev;
}

Eigen::VectorXd grad_from_eval(const GmmWorld::Impl& w, const PosteriorEval& ev) {
  std::vector<double> r = ev.log_terms;
  responsibilities(r);
  Eigen::VectorXd g_rot = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(w.d));
  for (std::size_t j = 0; j < r.size(); ++j) {
    if (r[j] == 0.0) continue;
    for (std::size_t g = 0; g < w.groups.size(); ++g) {
      const auto& grp = w.groups[g];
      const auto n = static_cast<Eigen::Index>(grp.end - grp.begin);
      const auto b = static_cast<Eigen::Index>(grp.begin);
      g_rot.segment(b, n) -= (r[j] / w.post_var[j][g]) * ev.rotated_resid[j].segment(b, n);
    }
  }
  return w.U * g_rot;
}

}  // namespace

double log_density_x0_given_y(const GmmWorld& world, const Tensor& x0, const Tensor& y) {
  const auto& w = world.impl();
  check_lr(w, y);
  require(x0.size() == w.d, "log density: HR tensor has wrong size");
  const auto post = posterior_lite(w, to_eigen(y));
  return log_sum_exp(eval_posterior(w, post, to_eigen(x0)).log_terms);
}

Tensor grad_log_density_x0_given_y(const GmmWorld& world, const Tensor& x0, const Tensor& y) {
  const auto& w = world.impl();
  check_lr(w, y);
  require(x0.size() == w.d, "log density: HR tensor has wrong size");
  const auto post = posterior_lite(w, to_eigen(y));
  return from_eigen(w.hr, grad_from_eval(w, eval_posterior(w, post, to_eigen(x0))));
}

ModeResult mode_oracle(const GmmWorld& world, const Tensor& y, int n_starts, std::uint64_t seed) {
  const auto& w = world.impl();
  check_lr(w, y);
  require(n_starts >= 0, "mode oracle: n_starts must be >= 0");
  const auto post = posterior_lite(w, to_eigen(y));
  const std::size_t J = w.components.size();
  constexpr int kMaxIter = 20000;
  constexpr double kGradTol = 1e-6;

  std::vector<Eigen::VectorXd> starts(post.mean.begin(), post.mean.end());
  for (int i = 0; i < n_starts; ++i) {
    rng::Generator gen(seed, rng::Stream::kModeStarts, static_cast<std::uint64_t>(i));
    const std::size_t j = gen.below(J);
    Eigen::VectorXd xi(static_cast<Eigen::Index>(w.d));
    gen.fill_normal({xi.data(), static_cast<std::size_t>(xi.size())});
    // Perturb with the component's own posterior spread.
    for (std::size_t g = 0; g < w.groups.size(); ++g)
      for (std::size_t k = w.groups[g].begin; k < w.groups[g].end; ++k)
        xi(static_cast<Eigen::Index>(k)) *= std::sqrt(w.post_var[j][g]);
    starts.push_back(post.mean[j] + w.U * xi);
  }

  ModeResult best{Tensor(w.hr), -std::numeric_limits<double>::infinity(),
                  std::numeric_limits<double>::infinity(), false};
  for (const auto& start : starts) {
    Eigen::VectorXd x = start;
    PosteriorEval ev = eval_posterior(w, post, x);
    double gnorm = grad_from_eval(w, ev).norm();
    for (int it = 0; it < kMaxIter && gnorm > kGradTol; ++it) {
      // Fixed point of the stationarity condition: x = (sum r_j C_j^-1)^-1 sum r_j C_j^-1 m_j.
      std::vector<double> r = ev.log_terms;
      responsibilities(r);
      Eigen::VectorXd num = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(w.d));
      Eigen::VectorXd den = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(w.d));
      for (std::size_t j = 0; j < J; ++j) {
        if (r[j] == 0.0) continue;
        const Eigen::VectorXd mt = w.Ut * post.mean[j];
        for (std::size_t g = 0; g < w.groups.size(); ++g) {
          const auto& grp = w.groups[g];
          const auto n = static_cast<Eigen::Index>(grp.end - grp.begin);
          const auto b = static_cast<Eigen::Index>(grp.begin);
          const double prec = r[j] / w.post_var[j][g];
          num.segment(b, n) += prec * mt.segment(b, n);
          den.segment(b, n).array() += prec;
        }
      }
      x = w.U * (num.array() / den.array()).matrix();
      ev = eval_posterior(w, post, x);
      gnorm = grad_from_eval(w, ev).norm();
    }
    const double ld = log_sum_exp(ev.log_terms);
    if (ld > best.log_density) {
      best.mode = from_eigen(w.hr, x);
      best.log_density = ld;
      best.grad_norm = gnorm;
      best.converged = gnorm <= kGradTol;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------

GmmDenoiser::GmmDenoiser(GmmWorld world, DiscreteSchedule schedule)
    : world_(std::move(world)), schedule_(std::move(schedule)) {}

std::unique_ptr<NoiseField> GmmDenoiser::bind(const Condition& c) const {
  auto impl = world_.shared_impl();
  if (c.is_blank()) return std::make_unique<UnconditionalField>(impl, schedule_);
  check_lr(world_.impl(), c.lr());
  return std::make_unique<ConditionalField>(impl, schedule_, to_eigen(c.lr()));
}

}  // namespace odebc
