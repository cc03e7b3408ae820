#include <doctest.h>

#include <cmath>

#include "fairq/nn.hpp"

using namespace fairq;

namespace {

MlpSpec small_spec(std::vector<int> widths, OutputHead head, std::uint64_t seed = 7) {
  MlpSpec s;
  s.layer_widths = std::move(widths);
  s.output_head = head;
  s.seed = seed;
  return s;
}

}  // namespace

TEST_CASE("zeroed output layer gives 0.5 class probabilities") {
  Mlp model(small_spec({3, 8, 2}, OutputHead::Softmax2));
  // zero the last layer block (weights and biases)
  auto& p = model.params();
  const size_t last_block = static_cast<size_t>(8) * 2 + 2;
  for (size_t i = p.size() - last_block; i < p.size(); ++i) p[i] = 0.0;
  const auto pred = model.forward({0.1, -0.3, 2.0, 0.0, 0.0, 0.0}, 2);
  CHECK(pred[0] == doctest::Approx(0.5));
  CHECK(pred[1] == doctest::Approx(0.5));
}

TEST_CASE("identity activations compose to an affine map") {
  MlpSpec spec = small_spec({2, 2, 1}, OutputHead::Linear);
  spec.hidden_activation = Activation::Identity;
  Mlp model(spec);
  auto& p = model.params();
  std::fill(p.begin(), p.end(), 0.0);
  // W1 = [[1, 0], [0, 2]], b1 = (0.5, -1), W2 = (3, 1)^T, b2 = 0.25
  p[0] = 1.0;  // w1(0,0)
  p[3] = 2.0;  // w1(1,1)
  p[4] = 0.5;
  p[5] = -1.0;
  p[6] = 3.0;
  p[7] = 1.0;
  p[8] = 0.25;
  const auto pred = model.forward({1.0, 2.0}, 1);
  // h = (1*1+0.5, 2*2-1) = (1.5, 3); out = 3*1.5 + 1*3 + 0.25
  CHECK(pred[0] == doctest::Approx(3 * 1.5 + 3.0 + 0.25).epsilon(1e-12));
}

TEST_CASE("forward is deterministic given the seed") {
  Mlp a(small_spec({4, 16, 2}, OutputHead::Softmax2, 99));
  Mlp b(small_spec({4, 16, 2}, OutputHead::Softmax2, 99));
  const std::vector<double> x = {0.3, -0.2, 1.0, 0.8};
  const auto pa = a.forward(x, 1);
  const auto pb = b.forward(x, 1);
  CHECK(pa[0] == pb[0]);
  Mlp c(small_spec({4, 16, 2}, OutputHead::Softmax2, 100));
  CHECK(c.forward(x, 1)[0] != pa[0]);
}

TEST_CASE("backward matches finite differences on a 2-8-2 softmax net") {
  Rng rng(31);
  Mlp model(small_spec({2, 8, 2}, OutputHead::Softmax2, 5));
  const int n = 6;
  std::vector<double> x(static_cast<size_t>(n) * 2), upstream(static_cast<size_t>(n));
  for (double& v : x) v = rng.normal();
  for (double& v : upstream) v = rng.normal();

  model.forward(x, n);
  const auto analytic = model.backward(upstream);

  auto objective = [&]() {
    const auto pred = model.forward(x, n);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += upstream[static_cast<size_t>(i)] * pred[static_cast<size_t>(i)];
    return s;
  };
  const double h = 1e-5;
  double scale = 1e-8;
  std::vector<double> numeric(analytic.size());
  for (size_t i = 0; i < analytic.size(); ++i) {
    const double keep = model.params()[i];
    model.params()[i] = keep + h;
    const double up = objective();
    model.params()[i] = keep - h;
    const double down = objective();
    model.params()[i] = keep;
    numeric[i] = (up - down) / (2 * h);
    scale = std::max(scale, std::abs(numeric[i]));
  }
  double worst = 0.0;
  for (size_t i = 0; i < analytic.size(); ++i)
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / scale);
  CHECK(worst < 1e-4);
}

TEST_CASE("backward matches finite differences with selu and a linear head") {
  Rng rng(32);
  MlpSpec spec = small_spec({3, 5, 1}, OutputHead::Linear, 11);
  Mlp model(spec);
  const int n = 4;
  std::vector<double> x(static_cast<size_t>(n) * 3), upstream(static_cast<size_t>(n));
  for (double& v : x) v = rng.normal();
  for (double& v : upstream) v = rng.normal();
  model.forward(x, n);
  const auto analytic = model.backward(upstream);
  auto objective = [&]() {
    const auto pred = model.forward(x, n);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += upstream[static_cast<size_t>(i)] * pred[static_cast<size_t>(i)];
    return s;
  };
  const double h = 1e-5;
  double scale = 1e-8, worst = 0.0;
  for (size_t i = 0; i < analytic.size(); ++i) {
    const double keep = model.params()[i];
    model.params()[i] = keep + h;
    const double up = objective();
    model.params()[i] = keep - h;
    const double down = objective();
    model.params()[i] = keep;
    const double numeric = (up - down) / (2 * h);
    scale = std::max(scale, std::abs(numeric));
    worst = std::max(worst, std::abs(analytic[i] - numeric));
  }
  CHECK(worst / scale < 1e-4);
}

TEST_CASE("zero upstream gives zero gradients") {
  Mlp model(small_spec({2, 4, 2}, OutputHead::Softmax2));
  model.forward({0.5, -0.5}, 1);
  const auto grads = model.backward({0.0});
  for (double g : grads) CHECK(g == 0.0);
}

TEST_CASE("backward without a forward cache is an error") {
  Mlp model(small_spec({2, 4, 2}, OutputHead::Softmax2));
  CHECK_THROWS_AS(model.backward({1.0}), NnError);
}

TEST_CASE("sgd step on a quadratic") {
  OptimState opt;
  opt.kind = OptimKind::Sgd;
  opt.learning_rate = 0.1;
  std::vector<double> w = {1.0};
  opt.step(w, {1.0});  // grad of 0.5 w^2 at w=1
  CHECK(w[0] == doctest::Approx(0.9).epsilon(1e-15));
}

TEST_CASE("zero gradients and zero decay leave parameters unchanged") {
  OptimState opt;
  opt.kind = OptimKind::Adam;
  std::vector<double> w = {1.0, -2.0};
  opt.step(w, {0.0, 0.0});
  CHECK(w[0] == doctest::Approx(1.0));
  CHECK(w[1] == doctest::Approx(-2.0));
}

TEST_CASE("adam first step has magnitude close to the learning rate") {
  for (double g : {1e-4, 1.0, 1e4}) {
    OptimState opt;
    opt.kind = OptimKind::Adam;
    opt.learning_rate = 1e-3;
    std::vector<double> w = {0.0};
    opt.step(w, {g});
    // bias correction at t=1 gives mhat/sqrt(vhat) = sign(g)
    CHECK(std::abs(w[0]) == doctest::Approx(opt.learning_rate).epsilon(1e-3));
  }
}

TEST_CASE("a small net separates 2-d blobs") {
  Rng rng(33);
  const size_t n = 1000;
  std::vector<double> x, y;
  for (size_t i = 0; i < n; ++i) {
    const bool pos = rng.uniform() < 0.5;
    x.push_back(rng.normal() * 0.7 + (pos ? 1.5 : -1.5));
    x.push_back(rng.normal() * 0.7 + (pos ? 1.5 : -1.5));
    y.push_back(pos ? 1.0 : 0.0);
  }
  Mlp model(small_spec({2, 16, 2}, OutputHead::Softmax2, 3));
  OptimState opt;
  opt.learning_rate = 1e-2;
  for (int epoch = 0; epoch < 30; ++epoch) {
    for (size_t start = 0; start < n; start += 100) {
      const size_t bs = std::min<size_t>(100, n - start);
      std::vector<double> bx(x.begin() + static_cast<long>(start * 2),
                             x.begin() + static_cast<long>((start + bs) * 2));
      std::vector<double> by(y.begin() + static_cast<long>(start),
                             y.begin() + static_cast<long>(start + bs));
      const auto pred = model.forward(bx, static_cast<int>(bs));
      std::vector<double> grad;
      log_loss(pred, by, &grad);
      opt.step(model.params(), model.backward(grad));
    }
  }
  const auto pred = model.forward(x, static_cast<int>(n));
  size_t wrong = 0;
  for (size_t i = 0; i < n; ++i)
    if ((pred[i] >= 0.5 ? 1.0 : 0.0) != y[i]) ++wrong;
  CHECK(static_cast<double>(wrong) / static_cast<double>(n) < 0.05);
}

TEST_CASE("full-batch loss decreases monotonically on a convex problem") {
  Rng rng(34);
  const size_t n = 200;
  std::vector<double> x, y;
  for (size_t i = 0; i < n; ++i) {
    const double v1 = rng.normal(), v2 = rng.normal();
    x.push_back(v1);
    x.push_back(v2);
    y.push_back(0.7 * v1 - 0.2 * v2 + 0.1);
  }
  MlpSpec spec = small_spec({2, 4, 1}, OutputHead::Linear, 8);
  spec.hidden_activation = Activation::Identity;
  Mlp model(spec);
  OptimState opt;
  opt.kind = OptimKind::Sgd;
  opt.learning_rate = 0.02;
  double prev = 1e18;
  for (int it = 0; it < 60; ++it) {
    const auto pred = model.forward(x, static_cast<int>(n));
    std::vector<double> grad;
    const double loss = mse_loss(pred, y, &grad);
    CHECK(loss <= prev + 1e-12);
    prev = loss;
    opt.step(model.params(), model.backward(grad));
  }
}

TEST_CASE("loss helpers agree with hand arithmetic") {
  CHECK(mse_loss({1.0, 2.0}, {0.0, 0.0}, nullptr) == doctest::Approx(2.5));
  const double ll = log_loss({0.9, 0.2}, {1.0, 0.0}, nullptr);
  CHECK(ll == doctest::Approx(-(std::log(0.9) + std::log(0.8)) / 2.0).epsilon(1e-12));
  // clamping keeps the loss finite at the boundaries
  CHECK(std::isfinite(log_loss({0.0, 1.0}, {1.0, 0.0}, nullptr)));
}
