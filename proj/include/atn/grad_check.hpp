#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "atn/autograd.hpp"
#include "atn/params.hpp"

namespace atn {

// Builds a scalar loss on the given fresh tape. Must be deterministic: the
// checker calls it once for the analytic pass and twice per perturbed entry.
using LossBuilder = std::function<Var(Tape&)>;

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t entries = 0;
};

// Compares backward() against central differences for every entry of every
// tensor, using |a - n| / max(1e-8, |a| + |n|).
GradCheckResult grad_check(const LossBuilder& f,
                           const std::vector<std::pair<std::string, Tensor*>>& params,
                           double eps = 1e-5);
GradCheckResult grad_check(const LossBuilder& f, ParamStore& params, double eps = 1e-5);

}  // namespace atn
