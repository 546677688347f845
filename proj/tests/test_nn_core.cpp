#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>

#include "oracles.hpp"
#include "rankher/grad_check.hpp"
#include "rankher/losses.hpp"
#include "rankher/network.hpp"
#include "rankher/optimizer.hpp"
#include "rankher/rng.hpp"

using namespace rankher;
using namespace rankher::nn;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, RngStream& rng, double lo = -1.0,
                     double hi = 1.0) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (auto& v : t.data) v = rng.uniform(lo, hi);
  return t;
}

}  // namespace

TEST_CASE("forward: dense identity net maps input to itself") {
  Network net(std::vector<Layer>{Layer::dense(2, 2)});
  net.layers[0].weights.data = {1, 0, 0, 1};
  const Tensor& out = net.forward(Tensor::vec({1, 2}));
  CHECK(out.data[0] == doctest::Approx(1.0));
  CHECK(out.data[1] == doctest::Approx(2.0));
}

TEST_CASE("forward: 2x2 conv with identity-diagonal filter") {
  Network net(std::vector<Layer>{Layer::conv2d(1, 1, 2, 1)});
  net.layers[0].weights.data = {1, 0, 0, 1};
  Tensor x({1, 2, 2}, {1, 2, 3, 4});
  const Tensor& out = net.forward(x);
  CHECK(out.numel() == 1);
  CHECK(out.data[0] == doctest::Approx(5.0));

  Tensor ref = oracles::conv2d_reference(x, net.layers[0].weights, {0.0}, 1);
  CHECK(out.data[0] == doctest::Approx(ref.data[0]));
}

TEST_CASE("forward: conv2d agrees with receptive-field oracle on random nets") {
  RngStream rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    std::size_t H = 4 + rng.uniform_index(6);
    std::size_t f = 1 + rng.uniform_index(3);
    std::size_t s = 1 + rng.uniform_index(2);
    std::size_t C = 1 + rng.uniform_index(2);
    std::size_t OC = 1 + rng.uniform_index(3);
    Network net(std::vector<Layer>{Layer::conv2d(C, OC, f, s)});
    net.init_uniform(rng);
    for (auto& b : net.layers[0].bias.data) b = rng.uniform(-0.5, 0.5);
    Tensor x = random_tensor({C, H, H}, rng);
    const Tensor& out = net.forward(x);
    Tensor ref = oracles::conv2d_reference(x, net.layers[0].weights,
                                           net.layers[0].bias.data, s);
    REQUIRE(out.shape == ref.shape);
    for (std::size_t i = 0; i < out.numel(); ++i)
      CHECK(out.data[i] == doctest::Approx(ref.data[i]).epsilon(1e-12));
  }
}

TEST_CASE("forward: softmax of equal logits is uniform") {
  Network net(std::vector<Layer>{Layer::softmax()});
  const Tensor& out = net.forward(Tensor::vec({0, 0}));
  CHECK(out.data[0] == doctest::Approx(0.5));
  CHECK(out.data[1] == doctest::Approx(0.5));
}

TEST_CASE("forward: shape mismatch names the offending layer") {
  Network net = mlp({3, 4, 2});
  try {
    net.forward(Tensor::vec({1, 2}));
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("layer 0") != std::string::npos);
    CHECK(std::string(e.what()).find("dense") != std::string::npos);
  }
}

TEST_CASE("maxpool: single window takes the max") {
  Network net(std::vector<Layer>{Layer::maxpool2d(2, 2)});
  const Tensor& out = net.forward(Tensor({1, 2, 2}, {1, 2, 3, 4}));
  CHECK(out.numel() == 1);
  CHECK(out.data[0] == doctest::Approx(4.0));
}

TEST_CASE("maxpool: constant input stays constant") {
  Network net(std::vector<Layer>{Layer::maxpool2d(2, 1)});
  Tensor x = Tensor::zeros({1, 4, 4});
  x.fill(2.5);
  const Tensor& out = net.forward(x);
  for (double v : out.data) CHECK(v == doctest::Approx(2.5));
}

TEST_CASE("maxpool: 4x4 ramp, 2x2 stride 2") {
  Tensor x = Tensor::zeros({1, 4, 4});
  for (std::size_t i = 0; i < 16; ++i) x.data[i] = static_cast<double>(i);
  Network net(std::vector<Layer>{Layer::maxpool2d(2, 2)});
  const Tensor& out = net.forward(x);
  // frozen from the brute-force window-max oracle
  Tensor ref = oracles::maxpool_reference(x, 2, 2);
  REQUIRE(out.shape == std::vector<std::size_t>({1, 2, 2}));
  CHECK(out.data == std::vector<double>({5, 7, 13, 15}));
  CHECK(out.data == ref.data);
}

TEST_CASE("maxpool: filter larger than input is a configuration error") {
  Network net(std::vector<Layer>{Layer::maxpool2d(3, 1)});
  CHECK_THROWS_AS(net.forward(Tensor::zeros({1, 2, 2})), std::runtime_error);
}

TEST_CASE("loss_mse basics") {
  auto zero = loss_mse(Tensor::vec({1, 2}), Tensor::vec({1, 2}));
  CHECK(zero.value == doctest::Approx(0.0));

  auto r = loss_mse(Tensor::vec({2}), Tensor::vec({0}));
  CHECK(r.value == doctest::Approx(4.0));
  CHECK(r.grad.data[0] == doctest::Approx(4.0));

  CHECK_THROWS_AS(loss_mse(Tensor::vec({1}), Tensor::vec({1, 2})),
                  std::invalid_argument);
}

TEST_CASE("loss_mse gradient matches central finite differences") {
  RngStream rng(5);
  Tensor pred = random_tensor({6}, rng);
  Tensor target = random_tensor({6}, rng);
  auto r = loss_mse(pred, target);
  const double eps = 1e-6;
  for (std::size_t i = 0; i < pred.numel(); ++i) {
    Tensor p = pred;
    p.data[i] += eps;
    double fp = loss_mse(p, target).value;
    p.data[i] = pred.data[i] - eps;
    double fm = loss_mse(p, target).value;
    double numeric = (fp - fm) / (2 * eps);
    CHECK(r.grad.data[i] == doctest::Approx(numeric).epsilon(1e-6));
  }
}

TEST_CASE("crossentropy: exact prediction has zero loss") {
  auto r = loss_categorical_crossentropy(Tensor::vec({0, 1, 0}), 1);
  CHECK(r.value == doctest::Approx(0.0));
}

TEST_CASE("crossentropy: uniform over 5 classes is ln 5") {
  auto r = loss_categorical_crossentropy(Tensor::vec({0.2, 0.2, 0.2, 0.2, 0.2}), 3);
  CHECK(r.value == doctest::Approx(1.6094379124341003));
}

TEST_CASE("crossentropy: label out of range / invalid distribution") {
  CHECK_THROWS_AS(loss_categorical_crossentropy(Tensor::vec({0.5, 0.5}), 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(loss_categorical_crossentropy(Tensor::vec({0.9, 0.3}), 0),
                  std::invalid_argument);
}

TEST_CASE("crossentropy: combined logit gradient matches finite differences") {
  RngStream rng(11);
  Network net(std::vector<Layer>{Layer::dense(4, 5), Layer::softmax()});
  net.init_uniform(rng);
  Tensor x = random_tensor({4}, rng);
  const std::size_t label = 2;

  net.zero_grads();
  auto r = loss_categorical_crossentropy(net.forward(x), label);
  net.backward_from_logits(r.grad);
  std::vector<double> analytic;
  net.for_each_param([&](Tensor&, Tensor& g) {
    analytic.insert(analytic.end(), g.data.begin(), g.data.end());
  });

  auto numeric = oracles::finite_difference(
      net,
      [&] { return loss_categorical_crossentropy(net.forward(x), label).value; },
      1e-6);
  REQUIRE(analytic.size() == numeric.size());
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    double rel = std::abs(analytic[i] - numeric[i]) /
                 std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-12});
    CHECK(rel < 1e-4);
  }
}

TEST_CASE("backward: zero output gradient leaves all parameter gradients zero") {
  RngStream rng(3);
  Network net = mlp({3, 8, 2});
  net.init_uniform(rng);
  net.forward(random_tensor({3}, rng));
  net.backward(Tensor::zeros({2}));
  net.for_each_param([](Tensor&, Tensor& g) {
    for (double v : g.data) CHECK(v == 0.0);
  });
}

TEST_CASE("backward: single dense layer gradient is the outer product") {
  RngStream rng(9);
  Network net(std::vector<Layer>{Layer::dense(3, 2)});
  net.init_uniform(rng);
  Tensor x = random_tensor({3}, rng);
  Tensor g = random_tensor({2}, rng);
  net.forward(x);
  net.backward(g);
  for (std::size_t o = 0; o < 2; ++o) {
    for (std::size_t i = 0; i < 3; ++i)
      CHECK(net.layers[0].grad_w.data[o * 3 + i] ==
            doctest::Approx(g.data[o] * x.data[i]));
    CHECK(net.layers[0].grad_b.data[o] == doctest::Approx(g.data[o]));
  }
}

TEST_CASE("backward: conv+pool+dense net matches finite differences") {
  RngStream rng(21);
  std::vector<Layer> ls;
  ls.push_back(Layer::conv2d(1, 2, 3, 1));  // 6x6 -> 2x4x4
  ls.push_back(Layer::relu());
  ls.push_back(Layer::maxpool2d(2, 2));  // 2x2x2
  ls.push_back(Layer::dense(8, 3));
  Network net(std::move(ls));
  net.init_uniform(rng);
  Tensor x = random_tensor({1, 6, 6}, rng);
  Tensor target = random_tensor({3}, rng);

  net.zero_grads();
  auto r = loss_mse(net.forward(x), target);
  net.backward(r.grad);
  std::vector<double> analytic;
  net.for_each_param([&](Tensor&, Tensor& g) {
    analytic.insert(analytic.end(), g.data.begin(), g.data.end());
  });
  auto numeric = oracles::finite_difference(
      net, [&] { return loss_mse(net.forward(x), target).value; }, 1e-5);
  double max_rel = 0;
  for (std::size_t i = 0; i < analytic.size(); ++i)
    max_rel = std::max(max_rel,
                       std::abs(analytic[i] - numeric[i]) /
                           std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-12}));
  CHECK(max_rel < 1e-4);
}

TEST_CASE("backward: input gradient flows through to the caller") {
  RngStream rng(13);
  Network net = mlp({4, 6, 1});
  net.init_uniform(rng);
  Tensor x = random_tensor({4}, rng);
  net.forward(x);
  Tensor gin = net.backward(Tensor::vec({1.0}));
  // finite differences w.r.t. the input
  const double eps = 1e-6;
  for (std::size_t i = 0; i < 4; ++i) {
    Tensor xp = x;
    xp.data[i] += eps;
    double fp = net.forward(xp).data[0];
    xp.data[i] = x.data[i] - eps;
    double fm = net.forward(xp).data[0];
    CHECK(gin.data[i] == doctest::Approx((fp - fm) / (2 * eps)).epsilon(1e-6));
  }
}

TEST_CASE("backward without a forward pass is a usage error") {
  Network net = mlp({2, 2});
  CHECK_THROWS_AS(net.backward(Tensor::vec({0, 0})), std::logic_error);
  RngStream rng(1);
  net.init_uniform(rng);
  net.forward(Tensor::vec({1, 1}));
  net.backward(Tensor::vec({1, 0}));
  CHECK_THROWS_AS(net.backward(Tensor::vec({1, 0})), std::logic_error);
}

TEST_CASE("optimizer: sgd arithmetic") {
  Network net(std::vector<Layer>{Layer::dense(1, 1)});
  net.layers[0].weights.data[0] = 1.0;
  net.layers[0].grad_w.data[0] = 2.0;
  Optimizer opt = Optimizer::sgd(0.1);
  opt.step(net);
  CHECK(net.layers[0].weights.data[0] == doctest::Approx(0.8));
  CHECK(net.layers[0].grad_w.data[0] == 0.0);  // zeroed after step
}

TEST_CASE("optimizer: zero gradients leave parameters unchanged") {
  RngStream rng(4);
  Network net = mlp({3, 5, 2});
  net.init_uniform(rng);
  std::vector<double> before;
  net.for_each_param([&](Tensor& w, Tensor&) {
    before.insert(before.end(), w.data.begin(), w.data.end());
  });
  Optimizer opt = Optimizer::adam(1e-3);
  opt.step(net);
  std::vector<double> after;
  net.for_each_param([&](Tensor& w, Tensor&) {
    after.insert(after.end(), w.data.begin(), w.data.end());
  });
  CHECK(before == after);
}

TEST_CASE("optimizer: adam first step with constant gradient moves by lr") {
  Network net(std::vector<Layer>{Layer::dense(2, 2)});
  net.layers[0].weights.fill(0.5);
  net.layers[0].grad_w.fill(1.0);
  net.layers[0].grad_b.fill(1.0);
  const double lr = 0.01;
  Optimizer opt = Optimizer::adam(lr);
  opt.step(net);
  oracles::AdamRef ref{lr};
  const double expected = 0.5 - ref.update(1.0);
  for (double v : net.layers[0].weights.data)
    CHECK(v == doctest::Approx(0.5 - lr).epsilon(1e-7));
  for (double v : net.layers[0].bias.data)
    CHECK(v == doctest::Approx(-lr).epsilon(1e-7));
  CHECK(net.layers[0].weights.data[0] == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("optimizer: adam trajectory matches scripted reference") {
  Network net(std::vector<Layer>{Layer::dense(1, 1)});
  net.layers[0].weights.data[0] = 0.3;
  net.layers[0].bias.data[0] = -0.2;
  Optimizer opt = Optimizer::adam(0.05);
  oracles::AdamRef ref_w{0.05}, ref_b{0.05};
  double w = 0.3, b = -0.2;
  RngStream rng(17);
  for (int i = 0; i < 25; ++i) {
    double gw = rng.uniform(-2, 2), gb = rng.uniform(-2, 2);
    net.layers[0].grad_w.data[0] = gw;
    net.layers[0].grad_b.data[0] = gb;
    opt.step(net);
    w -= ref_w.update(gw);
    b -= ref_b.update(gb);
    CHECK(net.layers[0].weights.data[0] == doctest::Approx(w).epsilon(1e-12));
    CHECK(net.layers[0].bias.data[0] == doctest::Approx(b).epsilon(1e-12));
  }
}

TEST_CASE("grad_check: linear net with mse is exact to 1e-8") {
  RngStream rng(31);
  Network net(std::vector<Layer>{Layer::dense(4, 3), Layer::dense(3, 2)});
  net.init_uniform(rng);
  Tensor x = random_tensor({4}, rng);
  Tensor target = random_tensor({2}, rng);
  auto report = grad_check(
      net, x,
      [&](const Tensor& out) {
        auto r = loss_mse(out, target);
        return LossEval{r.value, r.grad, false};
      },
      1e-5);
  CHECK(report.max_rel_error < 1e-8);
}

TEST_CASE("grad_check: desk-preset classifier within 1e-4") {
  RngStream rng(32);
  Network net = conv_classifier_desk(5);
  net.init_uniform(rng);
  Tensor x = random_tensor({1, 32, 32}, rng, 0.0, 1.0);
  auto report = grad_check(
      net, x,
      [&](const Tensor& out) {
        auto r = loss_categorical_crossentropy(out, 2);
        return LossEval{r.value, r.grad, true};
      },
      1e-5);
  CHECK(report.max_rel_error < 1e-4);
}

TEST_CASE("grad_check: relu kink parameters are identifiable and excludable") {
  // w0 row has pre-activation exactly 0: analytic subgradient 0, numeric != 0.
  Network net(std::vector<Layer>{Layer::dense(1, 2), Layer::relu()});
  net.layers[0].weights.data = {0.0, 0.5};
  Tensor target = Tensor::vec({1.0, 1.0});
  auto report = grad_check(
      net, Tensor::vec({1.0}),
      [&](const Tensor& out) {
        auto r = loss_mse(out, target);
        return LossEval{r.value, r.grad, false};
      },
      1e-5);
  // params in order: w0, w1, b0, b1; w0 and b0 sit on the kink
  REQUIRE(report.per_param.size() == 4);
  CHECK(report.per_param[0] > 1e-2);
  CHECK(report.per_param[2] > 1e-2);
  CHECK(report.per_param[1] < 1e-8);
  CHECK(report.per_param[3] < 1e-8);
}

TEST_CASE("grad_check: epsilon outside [1e-7,1e-3] rejected") {
  Network net = mlp({1, 1});
  auto loss = [](const Tensor& out) {
    return LossEval{out.data[0], Tensor::vec({1.0}), false};
  };
  CHECK_THROWS_AS(grad_check(net, Tensor::vec({1.0}), loss, 1e-8),
                  std::invalid_argument);
  CHECK_THROWS_AS(grad_check(net, Tensor::vec({1.0}), loss, 1e-2),
                  std::invalid_argument);
}

// invariants ----------------------------------------------------------------

TEST_CASE("invariant: gradients sound over 20 random mixed networks") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RngStream rng(seed * 7919 + 1);
    Network net;
    bool linear_only = seed % 4 == 0;
    double tol;
    Tensor x;
    LossFn loss;
    Tensor target;
    if (linear_only) {
      net = Network(std::vector<Layer>{Layer::dense(5, 4), Layer::dense(4, 3)});
      x = random_tensor({5}, rng);
      target = random_tensor({3}, rng);
      tol = 1e-8;
      loss = [&](const Tensor& out) {
        auto r = loss_mse(out, target);
        return LossEval{r.value, r.grad, false};
      };
    } else {
      std::vector<Layer> ls;
      ls.push_back(Layer::conv2d(1, 2, 3, 1));  // 8x8 -> 2x6x6
      ls.push_back(Layer::relu());
      ls.push_back(Layer::maxpool2d(2, 2));  // 2x3x3
      ls.push_back(Layer::conv2d(2, 4, 2, 1));  // 4x2x2
      ls.push_back(Layer::relu());
      ls.push_back(Layer::dense(16, 4));
      ls.push_back(Layer::softmax());
      net = Network(std::move(ls));
      x = random_tensor({1, 8, 8}, rng);
      std::size_t label = rng.uniform_index(4);
      tol = 1e-4;
      loss = [&net, label](const Tensor& out) {
        auto r = loss_categorical_crossentropy(out, label);
        return LossEval{r.value, r.grad, true};
      };
    }
    net.init_uniform(rng);
    auto report = grad_check(net, x, loss, 1e-5);
    CHECK(report.max_rel_error < tol);
  }
}

TEST_CASE("invariant: softmax is a distribution for |logit| <= 50") {
  RngStream rng(55);
  Network net(std::vector<Layer>{Layer::softmax()});
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = 2 + rng.uniform_index(7);
    Tensor x = random_tensor({n}, rng, -50.0, 50.0);
    const Tensor& p = net.forward(x);
    double sum = 0;
    for (double v : p.data) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("invariant: maxpool backward routes to the argmax, conserving mass") {
  RngStream rng(66);
  for (int trial = 0; trial < 20; ++trial) {
    Network net(std::vector<Layer>{Layer::maxpool2d(2, 1)});  // overlapping windows
    Tensor x = random_tensor({2, 5, 5}, rng);
    net.forward(x);
    Tensor gout = random_tensor(net.layers[0].output.shape, rng, 0.1, 1.0);
    Tensor gin = net.backward(gout);
    double in_sum = 0, out_sum = 0;
    for (double v : gin.data) in_sum += v;
    for (double v : gout.data) out_sum += v;
    CHECK(in_sum == doctest::Approx(out_sum).epsilon(1e-12));
    // every nonzero input-gradient position is some window's stored argmax
    const auto& argmax = net.layers[0].argmax;
    for (std::size_t i = 0; i < gin.numel(); ++i) {
      if (gin.data[i] != 0.0)
        CHECK(std::count(argmax.begin(), argmax.end(), i) > 0);
    }
  }
}

TEST_CASE("invariant: forward is pure w.r.t. parameters") {
  RngStream rng(88);
  Network net = conv_classifier_desk(5);
  net.init_uniform(rng);
  Tensor x = random_tensor({1, 32, 32}, rng, 0.0, 1.0);
  Tensor a = net.forward(x);
  Tensor b = net.forward(x);
  CHECK(std::memcmp(a.data.data(), b.data.data(), a.numel() * sizeof(double)) == 0);
}

TEST_CASE("invariant: conv output dim formula matches window enumeration") {
  for (std::size_t n = 1; n <= 16; ++n)
    for (std::size_t f = 1; f <= n; ++f)
      for (std::size_t s = 1; s <= 4; ++s)
        CHECK(conv_out_dim(n, f, s) == oracles::window_count_reference(n, f, s));
}

// checkpoint ----------------------------------------------------------------

TEST_CASE("checkpoint: save/load round trip is bitwise for all layer kinds") {
  RngStream rng(99);
  Network net = conv_classifier_desk(3);
  net.init_uniform(rng);
  const std::string path = "ckpt_roundtrip.bin";
  save_network(net, path);
  Network loaded = load_network(path);
  REQUIRE(loaded.layers.size() == net.layers.size());
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    CHECK(loaded.layers[i].kind == net.layers[i].kind);
    CHECK(loaded.layers[i].weights.data == net.layers[i].weights.data);
    CHECK(loaded.layers[i].bias.data == net.layers[i].bias.data);
  }
  // identical forward
  Tensor x = random_tensor({1, 32, 32}, rng, 0.0, 1.0);
  Tensor a = net.forward(x);
  Tensor b = loaded.forward(x);
  CHECK(a.data == b.data);
  std::remove(path.c_str());
}

TEST_CASE("checkpoint: describe lists one row per layer") {
  Network net = conv_classifier_desk(5);
  std::string desc = describe_network(net);
  CHECK(std::count(desc.begin(), desc.end(), '\n') ==
        static_cast<long>(net.layers.size()) + 1);  // header + rows
  CHECK(desc.find("conv2d") != std::string::npos);
  CHECK(desc.find("softmax") != std::string::npos);
}

TEST_CASE("checkpoint: bad magic rejected") {
  const std::string path = "ckpt_bad.bin";
  {
    std::ofstream os(path, std::ios::binary);
    os << "NOPE!";
  }
  CHECK_THROWS_AS(load_network(path), std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("network presets compose to a 1x1 class head") {
  Network desk = conv_classifier_desk(5);
  RngStream rng(123);
  desk.init_uniform(rng);
  const Tensor& out = desk.forward(Tensor::zeros({1, 32, 32}));
  CHECK(out.shape == std::vector<std::size_t>({5}));
  double sum = 0;
  for (double v : out.data) sum += v;
  CHECK(sum == doctest::Approx(1.0));
}
