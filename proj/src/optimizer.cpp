#include "rankher/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace rankher::nn {

Optimizer::Optimizer(OptKind k, double lr) : kind_(k), lr_(lr) {
  if (lr < 0.0) throw std::invalid_argument("optimizer: negative learning rate");
}

void Optimizer::step(Network& net) {
  if (kind_ == OptKind::sgd) {
    net.for_each_param([&](Tensor& w, Tensor& g) {
      for (std::size_t i = 0; i < w.numel(); ++i) w.data[i] -= lr_ * g.data[i];
    });
  } else {
    ++t_;
    if (m_.empty()) {
      net.for_each_param([&](Tensor& w, Tensor&) {
        m_.push_back(Tensor::zeros(w.shape));
        v_.push_back(Tensor::zeros(w.shape));
      });
    }
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    std::size_t k = 0;
    net.for_each_param([&](Tensor& w, Tensor& g) {
      if (k >= m_.size() || m_[k].shape != w.shape)
        throw std::logic_error("optimizer: moment/parameter shape mismatch");
      Tensor& m = m_[k];
      Tensor& v = v_[k];
      for (std::size_t i = 0; i < w.numel(); ++i) {
        const double gi = g.data[i];
        m.data[i] = beta1_ * m.data[i] + (1.0 - beta1_) * gi;
        v.data[i] = beta2_ * v.data[i] + (1.0 - beta2_) * gi * gi;
        const double mhat = m.data[i] / bc1;
        const double vhat = v.data[i] / bc2;
        w.data[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
      }
      ++k;
    });
  }
  net.zero_grads();
}

}  // namespace rankher::nn
