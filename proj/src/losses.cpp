#include "rankher/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace rankher::nn {

LossResult loss_mse(const Tensor& prediction, const Tensor& target) {
  if (!prediction.same_shape(target))
    throw std::invalid_argument("loss_mse: shape mismatch " + prediction.shape_str() +
                                " vs " + target.shape_str());
  const std::size_t n = prediction.numel();
  Tensor grad = Tensor::zeros(prediction.shape);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = prediction.data[i] - target.data[i];
    sum += d * d;
    grad.data[i] = 2.0 * d / static_cast<double>(n);
  }
  return {sum / static_cast<double>(n), std::move(grad)};
}

LossResult loss_categorical_crossentropy(const Tensor& probabilities,
                                         std::size_t label) {
  const std::size_t n = probabilities.numel();
  if (label >= n)
    throw std::invalid_argument("crossentropy: label " + std::to_string(label) +
                                " out of range for " + std::to_string(n) + " classes");
  double sum = 0.0;
  for (double p : probabilities.data) sum += p;
  if (std::abs(sum - 1.0) > 1e-6)
    throw std::invalid_argument("crossentropy: input is not a probability vector");
  Tensor grad = probabilities;
  grad.shape = {n};
  grad.data[label] -= 1.0;
  const double p = probabilities.data[label];
  return {-std::log(p > 1e-300 ? p : 1e-300), std::move(grad)};
}

}  // namespace rankher::nn
