#include "odebc/verify.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "odebc/metrics.hpp"
#include "odebc/presets.hpp"
#include "odebc/rng.hpp"
#include "odebc/sampler.hpp"
#include "odebc/worldgen.hpp"

namespace odebc {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

/// log q_t(x | y) from the dense posterior: sum_j w_j N(x; a m_j, a^2 C_j + sg^2 I).
double dense_log_qt(const PosteriorGmm& post, const Eigen::VectorXd& x, double a, double sg) {
  const auto d = x.size();
  std::vector<double> terms;
  for (const auto& c : post.components) {
    const Eigen::Map<const Eigen::MatrixXd> C(c.covariance.data(), d, d);
    const Eigen::Map<const Eigen::VectorXd> m(c.mean.data(), d);
    Eigen::MatrixXd S = a * a * C;
    S.diagonal().array() += sg * sg;
    const Eigen::LLT<Eigen::MatrixXd> llt(S);
    const Eigen::VectorXd r = x - a * m;
    const double quad = r.dot(llt.solve(r));
    const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    terms.push_back(c.log_weight - 0.5 * (quad + logdet + d * std::log(2.0 * M_PI)));
  }
  double mx = terms[0];
  for (double t : terms) mx = std::max(mx, t);
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - mx);
  return mx + std::log(acc);
}

CheckResult score_check(const std::string& preset, int cases) {
  const auto world = make_preset_world(preset);
  const auto s = default_schedule();
  const GmmDenoiser model(world, s);
  double worst = 0.0;
  for (int i = 0; i < cases; ++i) {
    rng::Generator gen(1, rng::Stream::kVerify, static_cast<std::uint64_t>(i));
    const auto pair = sample_pairs(world, 1, 100 + static_cast<std::uint64_t>(i)).front();
    const double t = 0.02 + 0.96 * gen.uniform();
    const auto c = s.at(t);
    Tensor x(world.hr_shape());
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = c.alpha * pair.z[k] + c.sigma * gen.normal();
    const auto post = conditional_posterior(world, pair.y);
    const Tensor e = model.eps(x, Condition::observed(pair.y), t);
    Eigen::VectorXd xv = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
    double num = 0.0, den = 0.0;
    for (Eigen::Index k = 0; k < xv.size(); ++k) {
      const double h = 1e-5 * std::max(1.0, std::abs(xv(k)));
      Eigen::VectorXd xp = xv, xm = xv;
      xp(k) += h;
      xm(k) -= h;
      const double fd = (dense_log_qt(post, xp, c.alpha, c.sigma) -
                         dense_log_qt(post, xm, c.alpha, c.sigma)) / (2.0 * h);
      const double score = -e[static_cast<std::size_t>(k)] / c.sigma;
      num += (fd - score) * (fd - score);
      den += fd * fd;
    }
    worst = std::max(worst, std::sqrt(num / std::max(den, 1e-300)));
  }
  return {"score_fd_" + preset, worst < 1e-5, "max relative error " + fmt(worst)};
}

CheckResult telescoping_check() {
  const auto s = default_schedule();
  const auto zero = zero_denoiser();
  Tensor x_T(Shape::image(4, 4, 1));
  rng::Generator(2, rng::Stream::kVerify, 0).fill_normal(x_T.values());
  double worst = 0.0;
  for (int n : {1, 50, 1000}) {
    const auto out = project(*zero, s, SolverConfig::ddim(s, n), x_T, Condition::blank());
    const double ratio = s.alpha(0) / s.alpha(s.total_steps() - 1);
    for (std::size_t k = 0; k < out.size(); ++k)
      worst = std::max(worst, std::abs(out[k] - ratio * x_T[k]));
  }
  return {"ddim_telescoping", worst < 1e-12, "max abs error " + fmt(worst)};
}

double rel_err(const Tensor& a, const Tensor& ref) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    num += (a[k] - ref[k]) * (a[k] - ref[k]);
    den += ref[k] * ref[k];
  }
  return std::sqrt(num / den);
}

/// DDIM is first order and DPM-Solver-2 second order: doubling the step count
/// divides their errors by about 2 and 4.
std::vector<CheckResult> convergence_checks() {
  const auto world = make_preset_world("toy8");
  const auto s = default_schedule();
  const GmmDenoiser model(world, s);
  const auto pair = sample_pairs(world, 1, 31).front();
  const auto field = model.bind(Condition::observed(pair.y));
  Tensor x_T(world.hr_shape());
  rng::Generator(3, rng::Stream::kVerify, 0).fill_normal(x_T.values());
  const Tensor ref = project(*field, s, SolverConfig::euler(40000), x_T);
  const int steps[] = {40, 80, 160};
  std::vector<double> ddim, dpm;
  for (int n : steps) {
    ddim.push_back(rel_err(project(*field, s, SolverConfig::ddim(s, n), x_T), ref));
    dpm.push_back(rel_err(project(*field, s, SolverConfig::dpm_solver2(s, n), x_T), ref));
  }
  const double ddim_order = std::log2(ddim[1] / ddim[2]);
  const double dpm_order = std::log2(dpm[0] / dpm[1]);
  const double dpm20 = rel_err(project(*field, s, SolverConfig::dpm_solver2(s, 20), x_T), ref);
  const double ddim20 = rel_err(project(*field, s, SolverConfig::ddim(s, 20), x_T), ref);
  return {{"ddim_first_order", ddim[0] > ddim[1] && ddim[1] > ddim[2] && std::abs(ddim_order - 1.0) < 0.2,
           "observed order " + fmt(ddim_order) + ", DDIM-160 error " + fmt(ddim[2])},
          {"dpm2_second_order", std::abs(dpm_order - 2.0) < 0.3,
           "observed order " + fmt(dpm_order) + ", DPMS-80 error " + fmt(dpm[1])},
          {"dpm2_beats_ddim", dpm20 < ddim20, "DPMS-20 " + fmt(dpm20) + " vs DDIM-20 " + fmt(ddim20)}};
}

CheckResult mode_check() {
  const auto world = make_preset_world("gauss8");
  const auto pair = sample_pairs(world, 1, 41).front();
  const auto mode = mode_oracle(world, pair.y, 4, 1);
  const auto post = conditional_posterior(world, pair.y);
  double worst = 0.0;
  for (std::size_t k = 0; k < mode.mode.size(); ++k)
    worst = std::max(worst, std::abs(mode.mode[k] - post.components[0].mean[k]));
  return {"mode_single_component", mode.converged && worst < 1e-8, "max abs error " + fmt(worst)};
}

CheckResult marginal_check(int workers) {
  const auto world = make_preset_world("toy2");
  const auto s = default_schedule();
  const GmmDenoiser model(world, s);
  const auto field = model.bind(Condition::blank());
  const auto cfg = SolverConfig::ddim(s, 200);
  constexpr std::size_t kN = 1500;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < kN; ++i) {
    Tensor x_T(world.hr_shape());
    rng::Generator(4, rng::Stream::kVerify, i).fill_normal(x_T.values());
    const auto out = project(*field, s, cfg, x_T);
    xs.insert(xs.end(), out.values().begin(), out.values().end());
    const auto z = sample_prior(world, 5, i);
    ys.insert(ys.end(), z.values().begin(), z.values().end());
  }
  const auto r = energy_test(xs, ys, 2, 199, 6, workers);
  return {"marginal_energy_test", r.p_value > 0.01, "p = " + fmt(r.p_value)};
}

}  // namespace

std::vector<CheckResult> run_verify_suite(int workers) {
  std::vector<CheckResult> out;
  out.push_back(score_check("toy2", 20));
  out.push_back(score_check("toy8", 20));
  out.push_back(telescoping_check());
  for (auto& c : convergence_checks()) out.push_back(std::move(c));
  out.push_back(mode_check());
  out.push_back(marginal_check(workers));
  return out;
}

}  // namespace odebc
