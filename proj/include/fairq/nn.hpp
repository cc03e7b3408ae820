#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fairq/rng.hpp"

namespace fairq {

struct NnError : std::runtime_error {
  explicit NnError(const std::string& what) : std::runtime_error(what) {}
};

enum class Activation { Selu, Relu, Identity };
enum class OutputHead { Softmax2, Linear };

struct MlpSpec {
  std::vector<int> layer_widths;  // input, hidden..., output
  Activation hidden_activation = Activation::Selu;
  OutputHead output_head = OutputHead::Softmax2;
  std::uint64_t seed = 0;
};

// Fully connected network with manual backprop, sized for two-layer
// experiments. Predictions are the class-1 probability (Softmax2) or the
// raw scalar output (Linear). One forward cache per instance: single
// writer during training.
class Mlp {
 public:
  explicit Mlp(const MlpSpec& spec);

  const MlpSpec& spec() const { return spec_; }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  // batch_x is row-major n x input_width
  std::vector<double> forward(const std::vector<double>& batch_x, int n_rows);

  // gradients of sum_i upstream[i] * pred[i] w.r.t. all parameters;
  // requires the forward cache from the matching forward() call
  std::vector<double> backward(const std::vector<double>& upstream);

 private:
  MlpSpec spec_;
  std::vector<double> params_;          // all layers, weights then biases per layer
  std::vector<size_t> layer_offsets_;   // offset of each layer's block in params_
  // forward cache
  int cached_rows_ = 0;
  std::vector<std::vector<double>> pre_acts_;   // per layer, n x width
  std::vector<std::vector<double>> acts_;       // per layer incl. input, n x width
  std::vector<double> cached_probs_;            // Softmax2 only

  double weight(int layer, int in, int out) const;
  size_t weight_index(int layer, int in, int out) const;
  size_t bias_index(int layer, int out) const;
};

enum class OptimKind { Adam, Sgd };

struct OptimState {
  OptimKind kind = OptimKind::Adam;
  double learning_rate = 1e-3;
  double weight_decay = 0.0;  // decoupled
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long long t = 0;
  std::vector<double> m;  // first moment
  std::vector<double> v;  // second moment

  void step(std::vector<double>& params, const std::vector<double>& grads);
};

// mean log loss with clamped probabilities, plus its gradient w.r.t. pred
double log_loss(const std::vector<double>& pred, const std::vector<double>& target,
                std::vector<double>* grad = nullptr);
double mse_loss(const std::vector<double>& pred, const std::vector<double>& target,
                std::vector<double>* grad = nullptr);

}  // namespace fairq
