#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rankher/rng.hpp"
#include "rankher/tensor.hpp"

namespace rankher::nn {

enum class LayerKind : std::uint8_t {
  dense = 1,
  conv2d = 2,
  maxpool2d = 3,
  relu = 4,
  softmax = 5,
};

const char* layer_kind_name(LayerKind k);

// One layer of a sequential network. Parameterized kinds (dense, conv2d)
// carry weights/bias plus mirrored gradient tensors; all kinds cache what
// their backward pass needs.
struct Layer {
  LayerKind kind;

  // dense config
  std::size_t in_features = 0;
  std::size_t out_features = 0;

  // conv2d / maxpool2d config (square filters, valid convolution)
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t filter = 0;
  std::size_t stride = 1;

  Tensor weights;  // dense: [out,in]; conv2d: [out_c,in_c,f,f]
  Tensor bias;     // [out] / [out_c]
  Tensor grad_w;
  Tensor grad_b;

  // forward caches
  Tensor input;
  Tensor output;
  std::vector<std::size_t> argmax;  // maxpool: flat input index per output cell
  std::size_t gap_spatial = 1;      // softmax: spatial cells averaged before softmax

  static Layer dense(std::size_t in, std::size_t out);
  static Layer conv2d(std::size_t in_c, std::size_t out_c, std::size_t filter,
                      std::size_t stride);
  static Layer maxpool2d(std::size_t filter, std::size_t stride);
  static Layer relu();
  static Layer softmax();

  bool has_params() const { return kind == LayerKind::dense || kind == LayerKind::conv2d; }
  std::size_t param_count() const { return weights.numel() + bias.numel(); }
};

// Sequential network over the layer kinds above. Single-writer: forward,
// backward and optimizer steps mutate cached state and must not run
// concurrently on one instance.
class Network {
 public:
  std::vector<Layer> layers;

  Network() = default;
  explicit Network(std::vector<Layer> ls) : layers(std::move(ls)) {}

  // Runs the full forward pass, caching per-layer activations.
  // Throws std::runtime_error naming the offending layer on a shape mismatch.
  const Tensor& forward(const Tensor& input);

  // Backpropagates a gradient w.r.t. the network output. Accumulates into
  // grad_w/grad_b of every parameterized layer and returns the gradient
  // w.r.t. the network input. Requires a forward call since the last backward.
  Tensor backward(const Tensor& output_grad);

  // Same, but the gradient is w.r.t. the pre-softmax logits (the last layer
  // must be softmax). This is the path the combined softmax+crossentropy
  // gradient enters through.
  Tensor backward_from_logits(const Tensor& logit_grad);

  void zero_grads();

  // Glorot-uniform weights (+-sqrt(6/(fan_in+fan_out))), zero bias.
  void init_uniform(RngStream& rng);

  std::size_t param_count() const;

  template <class F>
  void for_each_param(F&& f) {
    for (auto& l : layers)
      if (l.has_params()) {
        f(l.weights, l.grad_w);
        f(l.bias, l.grad_b);
      }
  }

  template <class F>
  void for_each_param(F&& f) const {
    for (const auto& l : layers)
      if (l.has_params()) {
        f(l.weights, l.grad_w);
        f(l.bias, l.grad_b);
      }
  }

  const Tensor& output() const;

 private:
  Tensor backprop(const Tensor& grad, bool from_logits);
  bool forward_done_ = false;
};

// conv/pool output length for one spatial axis: floor((n - f) / s) + 1
std::size_t conv_out_dim(std::size_t n, std::size_t f, std::size_t s);

// Builders ------------------------------------------------------------------

// Dense chain with relu between hidden layers and a linear head.
Network mlp(const std::vector<std::size_t>& dims);

// Convolutional classifier presets ending in a 1x1 conv + softmax head.
// "desk": 32x32 grayscale input; "full": 256x256.
Network conv_classifier_desk(std::size_t classes);
Network conv_classifier_full(std::size_t classes);

// Checkpoint ----------------------------------------------------------------
// Flat binary: magic "RKHN1", then per layer: kind tag (u8), config ints
// (u32 LE), parameter count (u64 LE), parameters (f64 LE).
// Config ints per kind: dense [in,out]; conv2d [in_c,out_c,filter,stride];
// maxpool2d [filter,stride]; relu/softmax none.

void save_network(const Network& net, const std::string& path);
Network load_network(const std::string& path);
std::string describe_network(const Network& net);

}  // namespace rankher::nn
