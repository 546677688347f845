#include "rankher/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rankher::nn {

GradCheckReport grad_check(Network& net, const Tensor& input, const LossFn& loss,
                           double epsilon) {
  if (epsilon < 1e-7 || epsilon > 1e-3)
    throw std::invalid_argument("grad_check: epsilon outside [1e-7, 1e-3]");

  net.zero_grads();
  LossEval at_point = loss(net.forward(input));
  if (at_point.grad_wrt_logits)
    net.backward_from_logits(at_point.grad);
  else
    net.backward(at_point.grad);

  std::vector<double> analytic;
  net.for_each_param([&](Tensor&, Tensor& g) {
    analytic.insert(analytic.end(), g.data.begin(), g.data.end());
  });

  auto eval = [&]() { return loss(net.forward(input)).value; };

  GradCheckReport report;
  report.per_param.reserve(analytic.size());
  std::size_t k = 0;
  net.for_each_param([&](Tensor& w, Tensor&) {
    for (std::size_t i = 0; i < w.numel(); ++i, ++k) {
      const double saved = w.data[i];
      w.data[i] = saved + epsilon;
      const double f_plus = eval();
      w.data[i] = saved - epsilon;
      const double f_minus = eval();
      w.data[i] = saved;
      const double numeric = (f_plus - f_minus) / (2.0 * epsilon);
      const double a = analytic[k];
      const double rel = std::abs(a - numeric) /
                         std::max({std::abs(a), std::abs(numeric), 1e-12});
      report.per_param.push_back(rel);
      report.max_rel_error = std::max(report.max_rel_error, rel);
    }
  });
  net.zero_grads();
  return report;
}

}  // namespace rankher::nn
