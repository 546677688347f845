#pragma once

#include <cstddef>

#include "rankher/tensor.hpp"

namespace rankher::nn {

struct LossResult {
  double value;
  Tensor grad;
};

// Mean squared error over all elements; grad is w.r.t. the prediction.
LossResult loss_mse(const Tensor& prediction, const Tensor& target);

// -log p[label] on a probability vector. The returned gradient is the
// combined softmax+crossentropy gradient w.r.t. the pre-softmax logits,
// p - one_hot(label); feed it through Network::backward_from_logits.
LossResult loss_categorical_crossentropy(const Tensor& probabilities,
                                         std::size_t label);

}  // namespace rankher::nn
