#pragma once

#include <functional>
#include <vector>

#include "rankher/losses.hpp"
#include "rankher/network.hpp"

namespace rankher::nn {

// Loss callback for gradient checking. `grad_wrt_logits` marks the gradient
// as pre-softmax (combined softmax+CE), routed through backward_from_logits.
struct LossEval {
  double value;
  Tensor grad;
  bool grad_wrt_logits = false;
};

using LossFn = std::function<LossEval(const Tensor& network_output)>;

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::vector<double> per_param;  // relative error per scalar parameter
};

// Central finite differences against the analytic backward pass.
// rel error = |analytic - numeric| / max(|analytic|, |numeric|, 1e-12).
// epsilon must lie in [1e-7, 1e-3].
GradCheckReport grad_check(Network& net, const Tensor& input, const LossFn& loss,
                           double epsilon);

}  // namespace rankher::nn
