#pragma once

#include <cstdint>
#include <vector>

#include "rankher/network.hpp"
#include "rankher/tensor.hpp"

namespace rankher::nn {

enum class OptKind { sgd, adam };

// Per-network optimizer. Adam moment buffers are allocated on first step and
// shape-checked against the network's parameters on every step afterwards.
// step() consumes the network's accumulated gradients and zeroes them.
class Optimizer {
 public:
  static Optimizer sgd(double lr) { return Optimizer(OptKind::sgd, lr); }
  static Optimizer adam(double lr, double beta1 = 0.9, double beta2 = 0.999,
                        double eps = 1e-8) {
    Optimizer o(OptKind::adam, lr);
    o.beta1_ = beta1;
    o.beta2_ = beta2;
    o.eps_ = eps;
    return o;
  }

  void step(Network& net);

  OptKind kind() const { return kind_; }
  double learning_rate() const { return lr_; }
  std::uint64_t steps_taken() const { return t_; }

 private:
  Optimizer(OptKind k, double lr);

  OptKind kind_;
  double lr_;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  std::uint64_t t_ = 0;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
};

}  // namespace rankher::nn
