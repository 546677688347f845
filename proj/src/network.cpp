#include "rankher/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rankher::nn {

const char* layer_kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::dense: return "dense";
    case LayerKind::conv2d: return "conv2d";
    case LayerKind::maxpool2d: return "maxpool2d";
    case LayerKind::relu: return "relu";
    case LayerKind::softmax: return "softmax";
  }
  return "?";
}

Layer Layer::dense(std::size_t in, std::size_t out) {
  Layer l;
  l.kind = LayerKind::dense;
  l.in_features = in;
  l.out_features = out;
  l.weights = Tensor::zeros({out, in});
  l.bias = Tensor::zeros({out});
  l.grad_w = Tensor::zeros({out, in});
  l.grad_b = Tensor::zeros({out});
  return l;
}

Layer Layer::conv2d(std::size_t in_c, std::size_t out_c, std::size_t filter,
                    std::size_t stride) {
  if (stride == 0) throw std::invalid_argument("conv2d: stride must be positive");
  Layer l;
  l.kind = LayerKind::conv2d;
  l.in_channels = in_c;
  l.out_channels = out_c;
  l.filter = filter;
  l.stride = stride;
  l.weights = Tensor::zeros({out_c, in_c, filter, filter});
  l.bias = Tensor::zeros({out_c});
  l.grad_w = Tensor::zeros({out_c, in_c, filter, filter});
  l.grad_b = Tensor::zeros({out_c});
  return l;
}

Layer Layer::maxpool2d(std::size_t filter, std::size_t stride) {
  if (stride == 0) throw std::invalid_argument("maxpool2d: stride must be positive");
  Layer l;
  l.kind = LayerKind::maxpool2d;
  l.filter = filter;
  l.stride = stride;
  return l;
}

Layer Layer::relu() {
  Layer l;
  l.kind = LayerKind::relu;
  return l;
}

Layer Layer::softmax() {
  Layer l;
  l.kind = LayerKind::softmax;
  return l;
}

std::size_t conv_out_dim(std::size_t n, std::size_t f, std::size_t s) {
  if (f > n) return 0;
  return (n - f) / s + 1;
}

namespace {

[[noreturn]] void layer_error(std::size_t idx, const Layer& l, const std::string& msg) {
  throw std::runtime_error("layer " + std::to_string(idx) + " (" +
                           layer_kind_name(l.kind) + "): " + msg);
}

void forward_layer(std::size_t idx, Layer& l, const Tensor& x) {
  switch (l.kind) {
    case LayerKind::dense: {
      // any rank accepted, flattened row-major
      if (x.numel() != l.in_features)
        layer_error(idx, l, "expected " + std::to_string(l.in_features) +
                                " inputs, got " + x.shape_str());
      l.input = x;
      if (l.output.numel() != l.out_features) l.output = Tensor::zeros({l.out_features});
      const double* w = l.weights.data.data();
      const double* xv = x.data.data();
      double* y = l.output.data.data();
      const std::size_t in = l.in_features;
      for (std::size_t o = 0; o < l.out_features; ++o) {
        double acc = l.bias[o];
        const double* row = w + o * in;
        for (std::size_t i = 0; i < in; ++i) acc += row[i] * xv[i];
        y[o] = acc;
      }
      break;
    }
    case LayerKind::conv2d: {
      if (x.rank() != 3 || x.shape[0] != l.in_channels)
        layer_error(idx, l, "expected input [" + std::to_string(l.in_channels) +
                                "xHxW], got " + x.shape_str());
      const std::size_t H = x.shape[1], W = x.shape[2], f = l.filter, s = l.stride;
      if (f > H || f > W)
        layer_error(idx, l, "filter " + std::to_string(f) + " larger than input " +
                                x.shape_str());
      const std::size_t OH = conv_out_dim(H, f, s), OW = conv_out_dim(W, f, s);
      l.input = x;
      if (l.output.shape != std::vector<std::size_t>{l.out_channels, OH, OW})
        l.output = Tensor::zeros({l.out_channels, OH, OW});
      for (std::size_t oc = 0; oc < l.out_channels; ++oc) {
        for (std::size_t oh = 0; oh < OH; ++oh) {
          for (std::size_t ow = 0; ow < OW; ++ow) {
            double acc = l.bias[oc];
            for (std::size_t c = 0; c < l.in_channels; ++c) {
              const double* xrow = &x.data[(c * H + oh * s) * W + ow * s];
              const double* wrow = &l.weights.data[((oc * l.in_channels + c) * f) * f];
              for (std::size_t a = 0; a < f; ++a)
                for (std::size_t b = 0; b < f; ++b)
                  acc += xrow[a * W + b] * wrow[a * f + b];
            }
            l.output.at(oc, oh, ow) = acc;
          }
        }
      }
      break;
    }
    case LayerKind::maxpool2d: {
      if (x.rank() != 3)
        layer_error(idx, l, "expected rank-3 input, got " + x.shape_str());
      const std::size_t C = x.shape[0], H = x.shape[1], W = x.shape[2];
      const std::size_t f = l.filter, s = l.stride;
      if (f > H || f > W)
        layer_error(idx, l, "pool filter " + std::to_string(f) +
                                " larger than input " + x.shape_str());
      const std::size_t OH = conv_out_dim(H, f, s), OW = conv_out_dim(W, f, s);
      l.input = x;
      if (l.output.shape != std::vector<std::size_t>{C, OH, OW})
        l.output = Tensor::zeros({C, OH, OW});
      l.argmax.assign(C * OH * OW, 0);
      for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t oh = 0; oh < OH; ++oh) {
          for (std::size_t ow = 0; ow < OW; ++ow) {
            double best = -1e300;
            std::size_t best_idx = 0;
            for (std::size_t a = 0; a < f; ++a) {
              for (std::size_t b = 0; b < f; ++b) {
                std::size_t fi = (c * H + oh * s + a) * W + ow * s + b;
                if (x.data[fi] > best) {
                  best = x.data[fi];
                  best_idx = fi;
                }
              }
            }
            l.output.at(c, oh, ow) = best;
            l.argmax[(c * OH + oh) * OW + ow] = best_idx;
          }
        }
      }
      break;
    }
    case LayerKind::relu: {
      l.input = x;
      if (l.output.shape != x.shape) l.output = Tensor::zeros(x.shape);
      for (std::size_t i = 0; i < x.numel(); ++i)
        l.output.data[i] = x.data[i] > 0.0 ? x.data[i] : 0.0;
      break;
    }
    case LayerKind::softmax: {
      std::size_t C;
      if (x.rank() == 1) {
        C = x.shape[0];
        l.gap_spatial = 1;
      } else if (x.rank() == 3) {
        C = x.shape[0];
        l.gap_spatial = x.shape[1] * x.shape[2];
      } else {
        layer_error(idx, l, "expected rank-1 or rank-3 input, got " + x.shape_str());
      }
      l.input = x;
      if (l.output.numel() != C) l.output = Tensor::zeros({C});
      // global average pool over spatial, then stable softmax over channels
      double maxz = -1e300;
      for (std::size_t c = 0; c < C; ++c) {
        double z = 0.0;
        for (std::size_t i = 0; i < l.gap_spatial; ++i) z += x.data[c * l.gap_spatial + i];
        z /= static_cast<double>(l.gap_spatial);
        l.output[c] = z;
        maxz = std::max(maxz, z);
      }
      double sum = 0.0;
      for (std::size_t c = 0; c < C; ++c) {
        l.output[c] = std::exp(l.output[c] - maxz);
        sum += l.output[c];
      }
      for (std::size_t c = 0; c < C; ++c) l.output[c] /= sum;
      break;
    }
  }
}

// Backward through one layer: accumulates parameter grads, writes grad w.r.t.
// the layer input into gin. `grad` is w.r.t. the layer output (for softmax,
// optionally w.r.t. the pre-softmax logits).
Tensor backward_layer(Layer& l, const Tensor& grad, bool grad_is_logits) {
  switch (l.kind) {
    case LayerKind::dense: {
      Tensor gin = Tensor::zeros(l.input.shape);
      const std::size_t in = l.in_features, out = l.out_features;
      const double* g = grad.data.data();
      const double* xv = l.input.data.data();
      double* gw = l.grad_w.data.data();
      double* gi = gin.data.data();
      const double* w = l.weights.data.data();
      for (std::size_t o = 0; o < out; ++o) {
        const double go = g[o];
        l.grad_b[o] += go;
        double* gwrow = gw + o * in;
        const double* wrow = w + o * in;
        for (std::size_t i = 0; i < in; ++i) {
          gwrow[i] += go * xv[i];
          gi[i] += go * wrow[i];
        }
      }
      return gin;
    }
    case LayerKind::conv2d: {
      Tensor gin = Tensor::zeros(l.input.shape);
      const std::size_t H = l.input.shape[1], W = l.input.shape[2];
      const std::size_t f = l.filter, s = l.stride;
      const std::size_t OH = l.output.shape[1], OW = l.output.shape[2];
      for (std::size_t oc = 0; oc < l.out_channels; ++oc) {
        for (std::size_t oh = 0; oh < OH; ++oh) {
          for (std::size_t ow = 0; ow < OW; ++ow) {
            const double go = grad.data[(oc * OH + oh) * OW + ow];
            l.grad_b[oc] += go;
            for (std::size_t c = 0; c < l.in_channels; ++c) {
              const double* xrow = &l.input.data[(c * H + oh * s) * W + ow * s];
              double* girow = &gin.data[(c * H + oh * s) * W + ow * s];
              double* gwrow = &l.grad_w.data[((oc * l.in_channels + c) * f) * f];
              const double* wrow = &l.weights.data[((oc * l.in_channels + c) * f) * f];
              for (std::size_t a = 0; a < f; ++a) {
                for (std::size_t b = 0; b < f; ++b) {
                  gwrow[a * f + b] += go * xrow[a * W + b];
                  girow[a * W + b] += go * wrow[a * f + b];
                }
              }
            }
          }
        }
      }
      return gin;
    }
    case LayerKind::maxpool2d: {
      Tensor gin = Tensor::zeros(l.input.shape);
      for (std::size_t i = 0; i < grad.numel(); ++i)
        gin.data[l.argmax[i]] += grad.data[i];
      return gin;
    }
    case LayerKind::relu: {
      Tensor gin = Tensor::zeros(l.input.shape);
      for (std::size_t i = 0; i < grad.numel(); ++i)
        gin.data[i] = l.input.data[i] > 0.0 ? grad.data[i] : 0.0;
      return gin;
    }
    case LayerKind::softmax: {
      const std::size_t C = l.output.numel();
      // gradient w.r.t. the averaged logits
      Tensor gz = Tensor::zeros({C});
      if (grad_is_logits) {
        gz.data = grad.data;
      } else {
        double dot = 0.0;
        for (std::size_t c = 0; c < C; ++c) dot += grad[c] * l.output[c];
        for (std::size_t c = 0; c < C; ++c) gz[c] = l.output[c] * (grad[c] - dot);
      }
      Tensor gin = Tensor::zeros(l.input.shape);
      const double inv = 1.0 / static_cast<double>(l.gap_spatial);
      for (std::size_t c = 0; c < C; ++c)
        for (std::size_t i = 0; i < l.gap_spatial; ++i)
          gin.data[c * l.gap_spatial + i] = gz[c] * inv;
      return gin;
    }
  }
  throw std::logic_error("unreachable layer kind");
}

}  // namespace

const Tensor& Network::forward(const Tensor& input) {
  if (layers.empty()) throw std::runtime_error("forward on empty network");
  const Tensor* cur = &input;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    forward_layer(i, layers[i], *cur);
    cur = &layers[i].output;
  }
  forward_done_ = true;
  return layers.back().output;
}

const Tensor& Network::output() const {
  if (!forward_done_) throw std::logic_error("output() before forward()");
  return layers.back().output;
}

Tensor Network::backprop(const Tensor& grad, bool from_logits) {
  if (!forward_done_)
    throw std::logic_error("backward without a cached forward pass");
  if (from_logits && layers.back().kind != LayerKind::softmax)
    throw std::logic_error("backward_from_logits requires a softmax last layer");
  forward_done_ = false;
  Tensor g = grad;
  for (std::size_t i = layers.size(); i-- > 0;) {
    bool logits = from_logits && i + 1 == layers.size();
    g = backward_layer(layers[i], g, logits);
  }
  return g;
}

Tensor Network::backward(const Tensor& output_grad) {
  if (forward_done_ && output_grad.numel() != layers.back().output.numel())
    throw std::runtime_error("backward: gradient shape " + output_grad.shape_str() +
                             " does not match network output");
  return backprop(output_grad, false);
}

Tensor Network::backward_from_logits(const Tensor& logit_grad) {
  if (forward_done_ && logit_grad.numel() != layers.back().output.numel())
    throw std::runtime_error("backward_from_logits: gradient shape mismatch");
  return backprop(logit_grad, true);
}

void Network::zero_grads() {
  for (auto& l : layers) {
    if (!l.has_params()) continue;
    l.grad_w.fill(0.0);
    l.grad_b.fill(0.0);
  }
}

void Network::init_uniform(RngStream& rng) {
  for (auto& l : layers) {
    if (!l.has_params()) continue;
    double fan_in, fan_out;
    if (l.kind == LayerKind::dense) {
      fan_in = static_cast<double>(l.in_features);
      fan_out = static_cast<double>(l.out_features);
    } else {
      fan_in = static_cast<double>(l.in_channels * l.filter * l.filter);
      fan_out = static_cast<double>(l.out_channels * l.filter * l.filter);
    }
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (auto& w : l.weights.data) w = rng.uniform(-limit, limit);
    l.bias.fill(0.0);
  }
}

std::size_t Network::param_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.param_count();
  return n;
}

Network mlp(const std::vector<std::size_t>& dims) {
  if (dims.size() < 2) throw std::invalid_argument("mlp: need at least in/out dims");
  std::vector<Layer> ls;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    ls.push_back(Layer::dense(dims[i], dims[i + 1]));
    if (i + 2 < dims.size()) ls.push_back(Layer::relu());
  }
  return Network(std::move(ls));
}

Network conv_classifier_desk(std::size_t classes) {
  std::vector<Layer> ls;
  ls.push_back(Layer::conv2d(1, 8, 5, 2));
  ls.push_back(Layer::relu());
  ls.push_back(Layer::maxpool2d(2, 2));
  ls.push_back(Layer::conv2d(8, 16, 3, 2));
  ls.push_back(Layer::relu());
  ls.push_back(Layer::conv2d(16, 32, 3, 1));
  ls.push_back(Layer::relu());
  ls.push_back(Layer::conv2d(32, classes, 1, 1));
  ls.push_back(Layer::softmax());
  return Network(std::move(ls));
}

Network conv_classifier_full(std::size_t classes) {
  std::vector<Layer> ls;
  ls.push_back(Layer::conv2d(1, 24, 20, 2));
  ls.push_back(Layer::relu());
  ls.push_back(Layer::maxpool2d(7, 2));
  ls.push_back(Layer::conv2d(24, 48, 15, 2));
  ls.push_back(Layer::relu());
  ls.push_back(Layer::maxpool2d(4, 2));
  ls.push_back(Layer::conv2d(48, 96, 10, 2));
  ls.push_back(Layer::relu());
  ls.push_back(Layer::conv2d(96, classes, 1, 1));
  ls.push_back(Layer::softmax());
  return Network(std::move(ls));
}

// Checkpoint ----------------------------------------------------------------

namespace {

void put_u8(std::ostream& os, std::uint8_t v) { os.put(static_cast<char>(v)); }

void put_u32(std::ostream& os, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  os.write(b, 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  os.write(b, 8);
}

void put_f64(std::ostream& os, double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, 8);
  put_u64(os, v);
}

std::uint8_t get_u8(std::istream& is) {
  int c = is.get();
  if (c < 0) throw std::runtime_error("checkpoint: unexpected end of file");
  return static_cast<std::uint8_t>(c);
}

std::uint32_t get_u32(std::istream& is) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(get_u8(is)) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& is) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(get_u8(is)) << (8 * i);
  return v;
}

double get_f64(std::istream& is) {
  std::uint64_t v = get_u64(is);
  double d;
  std::memcpy(&d, &v, 8);
  return d;
}

constexpr char kMagic[5] = {'R', 'K', 'H', 'N', '1'};

}  // namespace

void save_network(const Network& net, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
  os.write(kMagic, 5);
  for (const auto& l : net.layers) {
    put_u8(os, static_cast<std::uint8_t>(l.kind));
    switch (l.kind) {
      case LayerKind::dense:
        put_u32(os, static_cast<std::uint32_t>(l.in_features));
        put_u32(os, static_cast<std::uint32_t>(l.out_features));
        break;
      case LayerKind::conv2d:
        put_u32(os, static_cast<std::uint32_t>(l.in_channels));
        put_u32(os, static_cast<std::uint32_t>(l.out_channels));
        put_u32(os, static_cast<std::uint32_t>(l.filter));
        put_u32(os, static_cast<std::uint32_t>(l.stride));
        break;
      case LayerKind::maxpool2d:
        put_u32(os, static_cast<std::uint32_t>(l.filter));
        put_u32(os, static_cast<std::uint32_t>(l.stride));
        break;
      case LayerKind::relu:
      case LayerKind::softmax:
        break;
    }
    put_u64(os, l.param_count());
    for (double w : l.weights.data) put_f64(os, w);
    for (double b : l.bias.data) put_f64(os, b);
  }
  if (!os) throw std::runtime_error("checkpoint: write failed for " + path);
}

Network load_network(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
  char magic[5];
  is.read(magic, 5);
  if (is.gcount() != 5 || std::memcmp(magic, kMagic, 5) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  std::vector<Layer> layers;
  while (true) {
    int peek = is.peek();
    if (peek == EOF) break;
    auto kind = static_cast<LayerKind>(get_u8(is));
    Layer l;
    switch (kind) {
      case LayerKind::dense: {
        std::size_t in = get_u32(is), out = get_u32(is);
        l = Layer::dense(in, out);
        break;
      }
      case LayerKind::conv2d: {
        std::size_t ic = get_u32(is), oc = get_u32(is);
        std::size_t f = get_u32(is), s = get_u32(is);
        l = Layer::conv2d(ic, oc, f, s);
        break;
      }
      case LayerKind::maxpool2d: {
        std::size_t f = get_u32(is), s = get_u32(is);
        l = Layer::maxpool2d(f, s);
        break;
      }
      case LayerKind::relu:
        l = Layer::relu();
        break;
      case LayerKind::softmax:
        l = Layer::softmax();
        break;
      default:
        throw std::runtime_error("checkpoint: unknown layer kind tag " +
                                 std::to_string(static_cast<int>(kind)));
    }
    std::uint64_t n = get_u64(is);
    if (n != l.param_count())
      throw std::runtime_error("checkpoint: parameter count mismatch in " + path);
    for (auto& w : l.weights.data) w = get_f64(is);
    for (auto& b : l.bias.data) b = get_f64(is);
    layers.push_back(std::move(l));
  }
  return Network(std::move(layers));
}

std::string describe_network(const Network& net) {
  std::ostringstream os;
  os << "idx  kind       config                     params\n";
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto& l = net.layers[i];
    std::ostringstream cfg;
    switch (l.kind) {
      case LayerKind::dense:
        cfg << l.in_features << " -> " << l.out_features;
        break;
      case LayerKind::conv2d:
        cfg << l.in_channels << " -> " << l.out_channels << ", " << l.filter << "x"
            << l.filter << " s" << l.stride;
        break;
      case LayerKind::maxpool2d:
        cfg << l.filter << "x" << l.filter << " s" << l.stride;
        break;
      default:
        break;
    }
    char line[128];
    std::snprintf(line, sizeof(line), "%-4zu %-10s %-26s %zu\n", i,
                  layer_kind_name(l.kind), cfg.str().c_str(), l.param_count());
    os << line;
  }
  return os.str();
}

}  // namespace rankher::nn
