#pragma once

#include <string>
#include <vector>

namespace odebc {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Oracle property checks on the small preset worlds: score against finite
/// differences of the explicit mixture density, DDIM telescoping with the
/// zero denoiser, observed convergence orders against a fine Euler
/// reference, mode recovery for a single component, and a marginal
/// two-sample test. Takes a few seconds on one core.
std::vector<CheckResult> run_verify_suite(int workers);

}  // namespace odebc
