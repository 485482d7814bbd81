#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ifolab/common/rng.hpp"
#include "ifolab/nn/matrix.hpp"

namespace ifolab::nn {

enum class Activation { identity, tanh };

// y = act(x W + b), x is a batch row per sample.
struct DenseLayer {
  Matrix weight;             // in × out
  std::vector<double> bias;  // out
  Activation act = Activation::identity;

  int in_dim() const { return weight.rows(); }
  int out_dim() const { return weight.cols(); }
};

// Residual gated self-attention. The incoming width-h feature row is reshaped
// into `tokens` positions of dimension h/tokens; the block computes
//   out = x + gamma * softmax(Q Kᵀ / sqrt(d)) V
// with Q = xWq, K = xWk, V = xWv, one head. gamma starts at 0, so a freshly
// inserted block is an exact identity and never degrades the initialization.
struct SelfAttentionLayer {
  Matrix wq, wk, wv;  // d × d
  double gamma = 0.0;
  int tokens = 4;

  int token_dim() const { return wq.rows(); }
  int width() const { return tokens * wq.rows(); }
};

using Layer = std::variant<DenseLayer, SelfAttentionLayer>;

// An ordered stack of layers; doubles as the container for gradients and
// Adam moments, which share its shape.
struct Network {
  std::vector<Layer> layers;

  int input_dim() const;
  int output_dim() const;
};

// Throws ConfigError if the dimension chain is inconsistent, a width is not
// divisible by an attention layer's token count, or a gamma is non-finite.
void validate(const Network& net);

struct NetConfig {
  std::vector<int> hidden = {64, 64};
  bool attention = true;
  int attention_tokens = 4;
};

// Dense(in→h1, tanh) [SA] Dense(h1→h2, tanh) [SA] ... Dense(hk→out, identity).
// Weights uniform in ±sqrt(6/(fan_in+fan_out)), biases zero, gammas zero.
Network make_network(int input_dim, int output_dim, const NetConfig& cfg, Rng& rng);

// Batched inference. Throws ConfigError on input width mismatch and
// NumericError (naming the layer index) if any layer output is non-finite.
Matrix forward(const Network& net, const Matrix& inputs);

// One attention block applied to an n×d token matrix. Exposed on its own so
// the block can be tested against a brute-force oracle.
Matrix self_attention(const SelfAttentionLayer& layer, const Matrix& token_features);

// Numerically stable softmax (max-subtraction).
std::vector<double> softmax(std::span<const double> logits);
void softmax_inplace(std::span<double> logits);

// Lowest index wins ties.
int argmax(std::span<const double> values);

// Draws index i with probability probs[i]. Throws DataError when the
// distribution has no mass.
int sample_categorical(std::span<const double> probs, Rng& rng);

// Mean negative log-likelihood of `targets` under softmax(net(inputs)) and
// gradients for every parameter, gamma included. `grads` is resized/zeroed.
double cross_entropy_grad(const Network& net, const Matrix& inputs,
                          std::span<const int> targets, Network& grads);

// Flat views over every parameter tensor, in layer order. A gradient or
// moment Network produced by zeros_like yields blocks in the same order.
std::vector<std::span<double>> param_blocks(Network& net);
std::vector<std::span<const double>> param_blocks(const Network& net);
std::size_t param_count(const Network& net);
Network zeros_like(const Network& net);

struct AdamState {
  Network m, v;
  long long step = 0;
};
AdamState make_adam_state(const Network& net);

// Bias-corrected Adam update; increments the step counter.
void adam_step(Network& params, const Network& grads, AdamState& state, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

struct TrainHyper {
  int epochs = 20;
  int batch = 64;
  double lr = 1e-3;
};

struct TrainStats {
  double loss = 0.0;      // mean cross-entropy over the dataset after training
  double accuracy = 0.0;  // argmax accuracy over the dataset after training
};

// Minibatch Adam on cross-entropy. Shuffles with `rng` each epoch.
TrainStats train_classifier(Network& net, const Matrix& inputs, std::span<const int> targets,
                            const TrainHyper& hyper, Rng& rng);

// Mean loss/accuracy sweep without touching parameters.
TrainStats dataset_stats(const Network& net, const Matrix& inputs, std::span<const int> targets);

// Text checkpoint; round-trips every double bit-exactly.
void save_network(const Network& net, const std::string& path);
Network load_network(const std::string& path);

}  // namespace ifolab::nn
