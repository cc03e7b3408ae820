#include "fairq/nn.hpp"

#include <cmath>

namespace fairq {

namespace {

constexpr double kSeluLambda = 1.0507009873554804934193349852946;
constexpr double kSeluAlpha = 1.6732632423543772848170429916717;

double activate(Activation a, double x) {
  switch (a) {
    case Activation::Selu:
      return x > 0.0 ? kSeluLambda * x : kSeluLambda * kSeluAlpha * (std::exp(x) - 1.0);
    case Activation::Relu:
      return x > 0.0 ? x : 0.0;
    case Activation::Identity:
      return x;
  }
  return x;
}

double activate_grad(Activation a, double x) {
  switch (a) {
    case Activation::Selu:
      return x > 0.0 ? kSeluLambda : kSeluLambda * kSeluAlpha * std::exp(x);
    case Activation::Relu:
      return x > 0.0 ? 1.0 : 0.0;
    case Activation::Identity:
      return 1.0;
  }
  return 1.0;
}

}  // namespace

Mlp::Mlp(const MlpSpec& spec) : spec_(spec) {
  if (spec.layer_widths.size() < 3) throw NnError("need at least one hidden layer");
  if (spec.output_head == OutputHead::Softmax2 && spec.layer_widths.back() != 2)
    throw NnError("Softmax2 requires output width 2");

  size_t total = 0;
  for (size_t l = 0; l + 1 < spec.layer_widths.size(); ++l) {
    layer_offsets_.push_back(total);
    total += static_cast<size_t>(spec.layer_widths[l]) * spec.layer_widths[l + 1] +
             static_cast<size_t>(spec.layer_widths[l + 1]);
  }
  params_.assign(total, 0.0);

  // LeCun-normal fan-in init (suits selu); biases start at zero
  Rng rng(spec.seed);
  for (size_t l = 0; l + 1 < spec.layer_widths.size(); ++l) {
    const int fan_in = spec.layer_widths[l];
    const double sd = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (int i = 0; i < fan_in; ++i)
      for (int j = 0; j < spec.layer_widths[l + 1]; ++j)
        params_[weight_index(static_cast<int>(l), i, j)] = rng.normal(0.0, sd);
  }
}

size_t Mlp::weight_index(int layer, int in, int out) const {
  const int w_out = spec_.layer_widths[static_cast<size_t>(layer) + 1];
  return layer_offsets_[static_cast<size_t>(layer)] + static_cast<size_t>(in) * w_out + out;
}

size_t Mlp::bias_index(int layer, int out) const {
  const int w_in = spec_.layer_widths[static_cast<size_t>(layer)];
  const int w_out = spec_.layer_widths[static_cast<size_t>(layer) + 1];
  return layer_offsets_[static_cast<size_t>(layer)] + static_cast<size_t>(w_in) * w_out + out;
}

double Mlp::weight(int layer, int in, int out) const { return params_[weight_index(layer, in, out)]; }

std::vector<double> Mlp::forward(const std::vector<double>& batch_x, int n_rows) {
  const int in_w = spec_.layer_widths.front();
  if (n_rows <= 0 || batch_x.size() != static_cast<size_t>(n_rows) * in_w)
    throw NnError("forward: batch shape mismatch");

  const int n_layers = static_cast<int>(spec_.layer_widths.size()) - 1;
  cached_rows_ = n_rows;
  acts_.assign(static_cast<size_t>(n_layers) + 1, {});
  pre_acts_.assign(static_cast<size_t>(n_layers), {});
  acts_[0] = batch_x;

  for (int l = 0; l < n_layers; ++l) {
    const int wi = spec_.layer_widths[static_cast<size_t>(l)];
    const int wo = spec_.layer_widths[static_cast<size_t>(l) + 1];
    pre_acts_[static_cast<size_t>(l)].assign(static_cast<size_t>(n_rows) * wo, 0.0);
    auto& z = pre_acts_[static_cast<size_t>(l)];
    const auto& x = acts_[static_cast<size_t>(l)];
    for (int r = 0; r < n_rows; ++r) {
      for (int j = 0; j < wo; ++j) z[static_cast<size_t>(r) * wo + j] = params_[bias_index(l, j)];
      for (int i = 0; i < wi; ++i) {
        const double xv = x[static_cast<size_t>(r) * wi + i];
        if (xv == 0.0) continue;
        const size_t base = weight_index(l, i, 0);
        for (int j = 0; j < wo; ++j) z[static_cast<size_t>(r) * wo + j] += xv * params_[base + static_cast<size_t>(j)];
      }
    }
    const bool last = l == n_layers - 1;
    acts_[static_cast<size_t>(l) + 1].resize(z.size());
    auto& a = acts_[static_cast<size_t>(l) + 1];
    for (size_t idx = 0; idx < z.size(); ++idx)
      a[idx] = last ? z[idx] : activate(spec_.hidden_activation, z[idx]);
  }

  const auto& out = acts_.back();
  std::vector<double> pred(static_cast<size_t>(n_rows));
  if (spec_.output_head == OutputHead::Softmax2) {
    cached_probs_.resize(static_cast<size_t>(n_rows));
    for (int r = 0; r < n_rows; ++r) {
      const double z0 = out[static_cast<size_t>(r) * 2];
      const double z1 = out[static_cast<size_t>(r) * 2 + 1];
      const double p = 1.0 / (1.0 + std::exp(z0 - z1));  // softmax class-1 probability
      cached_probs_[static_cast<size_t>(r)] = p;
      pred[static_cast<size_t>(r)] = p;
    }
  } else {
    for (int r = 0; r < n_rows; ++r) pred[static_cast<size_t>(r)] = out[static_cast<size_t>(r)];
  }
  return pred;
}

std::vector<double> Mlp::backward(const std::vector<double>& upstream) {
  if (cached_rows_ == 0) throw NnError("backward: no forward cache");
  if (upstream.size() != static_cast<size_t>(cached_rows_))
    throw NnError("backward: upstream length mismatch");

  const int n_layers = static_cast<int>(spec_.layer_widths.size()) - 1;
  const int n_rows = cached_rows_;
  std::vector<double> grads(params_.size(), 0.0);

  // gradient w.r.t. the output pre-activations
  const int out_w = spec_.layer_widths.back();
  std::vector<double> delta(static_cast<size_t>(n_rows) * out_w);
  if (spec_.output_head == OutputHead::Softmax2) {
    for (int r = 0; r < n_rows; ++r) {
      const double p = cached_probs_[static_cast<size_t>(r)];
      const double dp = upstream[static_cast<size_t>(r)] * p * (1.0 - p);
      delta[static_cast<size_t>(r) * 2] = -dp;
      delta[static_cast<size_t>(r) * 2 + 1] = dp;
    }
  } else {
    for (int r = 0; r < n_rows; ++r) delta[static_cast<size_t>(r)] = upstream[static_cast<size_t>(r)];
  }

  for (int l = n_layers - 1; l >= 0; --l) {
    const int wi = spec_.layer_widths[static_cast<size_t>(l)];
    const int wo = spec_.layer_widths[static_cast<size_t>(l) + 1];
    const auto& x = acts_[static_cast<size_t>(l)];
    for (int r = 0; r < n_rows; ++r) {
      for (int j = 0; j < wo; ++j) {
        const double d = delta[static_cast<size_t>(r) * wo + j];
        if (d == 0.0) continue;
        grads[bias_index(l, j)] += d;
        for (int i = 0; i < wi; ++i)
          grads[weight_index(l, i, j)] += d * x[static_cast<size_t>(r) * wi + i];
      }
    }
    if (l == 0) break;
    // propagate to the previous layer through the activation
    const auto& z_prev = pre_acts_[static_cast<size_t>(l) - 1];
    std::vector<double> next(static_cast<size_t>(n_rows) * wi, 0.0);
    for (int r = 0; r < n_rows; ++r)
      for (int i = 0; i < wi; ++i) {
        double s = 0.0;
        for (int j = 0; j < wo; ++j)
          s += delta[static_cast<size_t>(r) * wo + j] * weight(l, i, j);
        next[static_cast<size_t>(r) * wi + i] =
            s * activate_grad(spec_.hidden_activation, z_prev[static_cast<size_t>(r) * wi + i]);
      }
    delta.swap(next);
  }
  return grads;
}

void OptimState::step(std::vector<double>& params, const std::vector<double>& grads) {
  if (params.size() != grads.size()) throw NnError("optimizer: shape mismatch");
  if (kind == OptimKind::Sgd) {
    for (size_t i = 0; i < params.size(); ++i) {
      params[i] -= learning_rate * grads[i];
      if (weight_decay > 0.0) params[i] -= learning_rate * weight_decay * params[i];
    }
    return;
  }
  if (m.size() != params.size()) {
    m.assign(params.size(), 0.0);
    v.assign(params.size(), 0.0);
    t = 0;
  }
  ++t;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (size_t i = 0; i < params.size(); ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * grads[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * grads[i] * grads[i];
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    params[i] -= learning_rate * mhat / (std::sqrt(vhat) + eps);
    if (weight_decay > 0.0) params[i] -= learning_rate * weight_decay * params[i];
  }
}

double log_loss(const std::vector<double>& pred, const std::vector<double>& target,
                std::vector<double>* grad) {
  if (pred.size() != target.size()) throw NnError("log_loss: length mismatch");
  const double lo = 1e-7, hi = 1.0 - 1e-7;
  double total = 0.0;
  if (grad) grad->assign(pred.size(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(pred.size());
  for (size_t i = 0; i < pred.size(); ++i) {
    const double u = std::min(hi, std::max(lo, pred[i]));
    const double y = target[i];
    total += -(y * std::log(u) + (1.0 - y) * std::log(1.0 - u));
    if (grad) (*grad)[i] = (-(y / u) + (1.0 - y) / (1.0 - u)) * inv_n;
  }
  return total * inv_n;
}

double mse_loss(const std::vector<double>& pred, const std::vector<double>& target,
                std::vector<double>* grad) {
  if (pred.size() != target.size()) throw NnError("mse_loss: length mismatch");
  double total = 0.0;
  if (grad) grad->assign(pred.size(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(pred.size());
  for (size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    total += d * d;
    if (grad) (*grad)[i] = 2.0 * d * inv_n;
  }
  return total * inv_n;
}

}  // namespace fairq
