#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rkpair/integrate.hpp"

namespace rkpair {

enum class ErrorRule { max_along_trajectory, endpoint_on_mask };

struct NamedProblem {
  std::string id;
  OdeSystem system;
  double t0 = 0;
  double tend = 0;
  State<double> x0;
  ErrorRule error_rule = ErrorRule::max_along_trajectory;
  std::vector<std::size_t> mask;  // components entering the error norm
  bool closed_form = false;
};

std::vector<std::string> problem_ids();
// A3, A4, D5 or PLEI; throws LookupError otherwise.
NamedProblem problem(const std::string& id);

// Closed form where available; otherwise a high-accuracy run (cached at tend).
State<double> reference_solution(const NamedProblem& p, double t);

// l2 error per the problem's rule: maximum over the recorded trajectory, or at
// tend restricted to the mask.
double measure_error(const NamedProblem& p, const IntegrationStats& stats);

// Two-body energy of a D5 state.
double kepler_energy(const State<double>& x);

}  // namespace rkpair
