#include "atn/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace atn {

GradCheckResult grad_check(const LossBuilder& f,
                           const std::vector<std::pair<std::string, Tensor*>>& params,
                           double eps) {
  for (auto& [_, t] : params) {
    t->set_requires_grad(true);
    t->grad();
    t->zero_grad();
  }
  {
    Tape tape;
    tape.backward(f(tape));
  }
  auto eval = [&f] {
    Tape tape;
    return f(tape).item();
  };

  GradCheckResult res;
  for (auto& [name, t] : params) {
    std::vector<double> analytic(t->grad().begin(), t->grad().end());
    for (std::size_t i = 0; i < t->size(); ++i) {
      double saved = (*t)[i];
      (*t)[i] = saved + eps;
      double up = eval();
      (*t)[i] = saved - eps;
      double down = eval();
      (*t)[i] = saved;
      double numeric = (up - down) / (2.0 * eps);
      double a = analytic[i];
      double err = std::fabs(a - numeric) / std::max(1e-8, std::fabs(a) + std::fabs(numeric));
      ++res.entries;
      if (err > res.max_rel_err || res.worst_param.empty()) {
        res.max_rel_err = std::max(res.max_rel_err, err);
        if (err >= res.max_rel_err) {
          res.worst_param = name;
          res.worst_index = i;
          res.analytic = a;
          res.numeric = numeric;
        }
      }
    }
  }
  return res;
}

GradCheckResult grad_check(const LossBuilder& f, ParamStore& params, double eps) {
  std::vector<std::pair<std::string, Tensor*>> list;
  for (const auto& name : params.names()) list.emplace_back(name, &params.at(name));
  return grad_check(f, list, eps);
}

}  // namespace atn
