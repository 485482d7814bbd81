#include "ifolab/nn/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ifolab/common/errors.hpp"

namespace ifolab::nn {

namespace {

int layer_in_dim(const Layer& layer) {
  if (const auto* d = std::get_if<DenseLayer>(&layer)) return d->in_dim();
  return std::get<SelfAttentionLayer>(layer).width();
}

int layer_out_dim(const Layer& layer) {
  if (const auto* d = std::get_if<DenseLayer>(&layer)) return d->out_dim();
  return std::get<SelfAttentionLayer>(layer).width();
}

void apply_activation(Matrix& z, Activation act) {
  if (act == Activation::identity) return;
  for (double& v : z.data()) v = std::tanh(v);
}

bool all_finite(const Matrix& m) {
  for (double v : m.data())
    if (!std::isfinite(v)) return false;
  return true;
}

Matrix dense_forward(const DenseLayer& layer, const Matrix& x) {
  Matrix z = matmul(x, layer.weight);
  for (int i = 0; i < z.rows(); ++i) {
    double* row = z.row(i);
    for (int j = 0; j < z.cols(); ++j) row[j] += layer.bias[j];
  }
  apply_activation(z, layer.act);
  return z;
}

// Per-sample intermediates of an attention block, kept for the backward pass.
struct AttnSample {
  Matrix q, k, v;     // n × d
  Matrix weights;     // n × n, post-softmax
  Matrix context;     // n × d, weights · v
};

// Token view of one batch row: row-major reshape into tokens × d.
Matrix tokens_of_row(const Matrix& batch, int row, int tokens, int d) {
  Matrix t(tokens, d);
  const double* src = batch.row(row);
  std::copy(src, src + static_cast<std::size_t>(tokens) * d, t.data().begin());
  return t;
}

AttnSample attention_sample_forward(const SelfAttentionLayer& layer, const Matrix& x) {
  const int n = layer.tokens;
  const int d = layer.token_dim();
  AttnSample s;
  s.q = matmul(x, layer.wq);
  s.k = matmul(x, layer.wk);
  s.v = matmul(x, layer.wv);
  s.weights = matmul_a_bt(s.q, s.k);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (double& v : s.weights.data()) v *= scale;
  for (int i = 0; i < n; ++i) softmax_inplace(s.weights.row_span(i));
  s.context = matmul(s.weights, s.v);
  return s;
}

struct DenseCache {
  const Matrix* in = nullptr;  // borrowed from the trace's activation list
  Matrix out;                  // post-activation
};

struct AttnCache {
  const Matrix* in = nullptr;
  Matrix out;
  std::vector<AttnSample> rows;
};

using LayerCache = std::variant<DenseCache, AttnCache>;

struct Trace {
  Matrix input;
  std::vector<LayerCache> caches;
};

const Matrix& cache_out(const LayerCache& c) {
  if (const auto* d = std::get_if<DenseCache>(&c)) return d->out;
  return std::get<AttnCache>(c).out;
}

const Matrix& forward_with_trace(const Network& net, const Matrix& inputs, Trace& trace) {
  if (inputs.cols() != net.input_dim())
    throw ConfigError("forward: input dimension " + std::to_string(inputs.cols()) +
                      " does not match network input " + std::to_string(net.input_dim()));
  trace.input = inputs;
  trace.caches.clear();
  trace.caches.reserve(net.layers.size());
  const Matrix* cur = &trace.input;
  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    const Layer& layer = net.layers[li];
    if (const auto* dense = std::get_if<DenseLayer>(&layer)) {
      DenseCache c;
      c.in = cur;
      c.out = dense_forward(*dense, *cur);
      trace.caches.push_back(std::move(c));
    } else {
      const auto& attn = std::get<SelfAttentionLayer>(layer);
      const int n = attn.tokens, d = attn.token_dim();
      AttnCache c;
      c.in = cur;
      c.out = Matrix(cur->rows(), cur->cols());
      c.rows.reserve(cur->rows());
      for (int r = 0; r < cur->rows(); ++r) {
        Matrix xt = tokens_of_row(*cur, r, n, d);
        AttnSample s = attention_sample_forward(attn, xt);
        double* out = c.out.row(r);
        const double* xin = cur->row(r);
        const double* ctx = s.context.data().data();
        for (int j = 0; j < n * d; ++j) out[j] = xin[j] + attn.gamma * ctx[j];
        c.rows.push_back(std::move(s));
      }
      trace.caches.push_back(std::move(c));
    }
    cur = &cache_out(trace.caches.back());
    if (!all_finite(*cur))
      throw NumericError("non-finite output at layer " + std::to_string(li));
  }
  return *cur;
}

// dOut → parameter grads and dIn for one dense layer.
void dense_backward(const DenseLayer& layer, const DenseCache& cache, const Matrix& dout,
                    DenseLayer& grad, Matrix& din) {
  Matrix dz = dout;
  if (layer.act == Activation::tanh) {
    const auto& y = cache.out.data();
    auto& g = dz.data();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] *= 1.0 - y[i] * y[i];
  }
  matmul_at_b_into(grad.weight, *cache.in, dz, true);
  for (int i = 0; i < dz.rows(); ++i) {
    const double* row = dz.row(i);
    for (int j = 0; j < dz.cols(); ++j) grad.bias[j] += row[j];
  }
  matmul_a_bt_into(din, dz, layer.weight, false);
}

void attention_backward(const SelfAttentionLayer& layer, const AttnCache& cache,
                        const Matrix& dout, SelfAttentionLayer& grad, Matrix& din) {
  const int n = layer.tokens, d = layer.token_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  din = Matrix(dout.rows(), dout.cols());
  Matrix dyt(n, d), dctx(n, d), dweights(n, n), dscores(n, n), dq(n, d), dk(n, d), dv(n, d);
  for (int r = 0; r < dout.rows(); ++r) {
    const AttnSample& s = cache.rows[r];
    Matrix xt = tokens_of_row(*cache.in, r, n, d);
    std::copy(dout.row(r), dout.row(r) + n * d, dyt.data().begin());

    // gamma gate: out = x + gamma * context
    double dgamma = 0.0;
    for (int j = 0; j < n * d; ++j) dgamma += dyt.data()[j] * s.context.data()[j];
    grad.gamma += dgamma;
    for (int j = 0; j < n * d; ++j) dctx.data()[j] = layer.gamma * dyt.data()[j];

    matmul_a_bt_into(dweights, dctx, s.v, false);
    matmul_at_b_into(dv, s.weights, dctx, false);

    // softmax rows: dS_i = A_i ⊙ (dA_i − ⟨dA_i, A_i⟩)
    for (int i = 0; i < n; ++i) {
      const double* a = s.weights.row(i);
      const double* da = dweights.row(i);
      double dot = 0.0;
      for (int j = 0; j < n; ++j) dot += da[j] * a[j];
      double* ds = dscores.row(i);
      for (int j = 0; j < n; ++j) ds[j] = a[j] * (da[j] - dot) * scale;
    }

    matmul_into(dq, dscores, s.k, false);
    matmul_at_b_into(dk, dscores, s.q, false);

    matmul_at_b_into(grad.wq, xt, dq, true);
    matmul_at_b_into(grad.wk, xt, dk, true);
    matmul_at_b_into(grad.wv, xt, dv, true);

    // dX = dY (residual) + dQ Wqᵀ + dK Wkᵀ + dV Wvᵀ
    Matrix dxt = matmul_a_bt(dq, layer.wq);
    matmul_a_bt_into(dxt, dk, layer.wk, true);
    matmul_a_bt_into(dxt, dv, layer.wv, true);
    double* drow = din.row(r);
    for (int j = 0; j < n * d; ++j) drow[j] = dyt.data()[j] + dxt.data()[j];
  }
}

void backward(const Network& net, const Trace& trace, const Matrix& dlogits, Network& grads) {
  Matrix dcur = dlogits;
  Matrix dprev;
  for (int li = static_cast<int>(net.layers.size()) - 1; li >= 0; --li) {
    const Layer& layer = net.layers[li];
    Layer& glayer = grads.layers[li];
    if (const auto* dense = std::get_if<DenseLayer>(&layer)) {
      dense_backward(*dense, std::get<DenseCache>(trace.caches[li]), dcur,
                     std::get<DenseLayer>(glayer), dprev);
    } else {
      attention_backward(std::get<SelfAttentionLayer>(layer),
                         std::get<AttnCache>(trace.caches[li]), dcur,
                         std::get<SelfAttentionLayer>(glayer), dprev);
    }
    dcur = std::move(dprev);
  }
}

void zero_params(Network& net) {
  for (auto block : param_blocks(net)) std::fill(block.begin(), block.end(), 0.0);
}

Matrix gather_rows(const Matrix& src, std::span<const int> idx) {
  Matrix out(static_cast<int>(idx.size()), src.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const double* s = src.row(idx[i]);
    std::copy(s, s + src.cols(), out.row(static_cast<int>(i)));
  }
  return out;
}

}  // namespace

int Network::input_dim() const {
  return layers.empty() ? 0 : layer_in_dim(layers.front());
}

int Network::output_dim() const {
  return layers.empty() ? 0 : layer_out_dim(layers.back());
}

void validate(const Network& net) {
  if (net.layers.empty()) throw ConfigError("network has no layers");
  int width = layer_in_dim(net.layers.front());
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const Layer& layer = net.layers[i];
    if (layer_in_dim(layer) != width)
      throw ConfigError("layer " + std::to_string(i) + " expects input " +
                        std::to_string(layer_in_dim(layer)) + " but gets " +
                        std::to_string(width));
    if (const auto* attn = std::get_if<SelfAttentionLayer>(&layer)) {
      if (!std::isfinite(attn->gamma))
        throw ConfigError("layer " + std::to_string(i) + " has non-finite gamma");
      if (attn->wq.rows() != attn->wq.cols() || !attn->wk.same_shape(attn->wq) ||
          !attn->wv.same_shape(attn->wq))
        throw ConfigError("layer " + std::to_string(i) + " has inconsistent projections");
    } else {
      const auto& dense = std::get<DenseLayer>(layer);
      if (static_cast<int>(dense.bias.size()) != dense.out_dim())
        throw ConfigError("layer " + std::to_string(i) + " bias size mismatch");
    }
    width = layer_out_dim(layer);
  }
}

Network make_network(int input_dim, int output_dim, const NetConfig& cfg, Rng& rng) {
  auto glorot = [&rng](int fan_in, int fan_out, Matrix& w) {
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    w = Matrix(fan_in, fan_out);
    for (double& v : w.data()) v = uniform_real(rng, -bound, bound);
  };
  Network net;
  int width = input_dim;
  for (int h : cfg.hidden) {
    DenseLayer dense;
    glorot(width, h, dense.weight);
    dense.bias.assign(h, 0.0);
    dense.act = Activation::tanh;
    net.layers.emplace_back(std::move(dense));
    width = h;
    if (cfg.attention) {
      if (cfg.attention_tokens < 1 || width % cfg.attention_tokens != 0)
        throw ConfigError("hidden width " + std::to_string(width) +
                          " not divisible into " + std::to_string(cfg.attention_tokens) +
                          " attention tokens");
      const int d = width / cfg.attention_tokens;
      SelfAttentionLayer attn;
      attn.tokens = cfg.attention_tokens;
      glorot(d, d, attn.wq);
      glorot(d, d, attn.wk);
      glorot(d, d, attn.wv);
      attn.gamma = 0.0;
      net.layers.emplace_back(std::move(attn));
    }
  }
  DenseLayer out;
  glorot(width, output_dim, out.weight);
  out.bias.assign(output_dim, 0.0);
  out.act = Activation::identity;
  net.layers.emplace_back(std::move(out));
  validate(net);
  return net;
}

Matrix forward(const Network& net, const Matrix& inputs) {
  if (inputs.cols() != net.input_dim())
    throw ConfigError("forward: input dimension " + std::to_string(inputs.cols()) +
                      " does not match network input " + std::to_string(net.input_dim()));
  Matrix cur = inputs;
  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    const Layer& layer = net.layers[li];
    if (const auto* dense = std::get_if<DenseLayer>(&layer)) {
      cur = dense_forward(*dense, cur);
    } else {
      const auto& attn = std::get<SelfAttentionLayer>(layer);
      const int n = attn.tokens, d = attn.token_dim();
      Matrix next(cur.rows(), cur.cols());
      for (int r = 0; r < cur.rows(); ++r) {
        Matrix xt = tokens_of_row(cur, r, n, d);
        Matrix yt = self_attention(attn, xt);
        std::copy(yt.data().begin(), yt.data().end(), next.row(r));
      }
      cur = std::move(next);
    }
    if (!all_finite(cur))
      throw NumericError("non-finite output at layer " + std::to_string(li));
  }
  return cur;
}

Matrix self_attention(const SelfAttentionLayer& layer, const Matrix& token_features) {
  if (token_features.rows() != layer.tokens || token_features.cols() != layer.token_dim())
    throw ConfigError("self_attention: expected " + std::to_string(layer.tokens) + "x" +
                      std::to_string(layer.token_dim()) + " tokens");
  AttnSample s = attention_sample_forward(layer, token_features);
  Matrix out = token_features;
  for (std::size_t i = 0; i < out.data().size(); ++i)
    out.data()[i] += layer.gamma * s.context.data()[i];
  return out;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.begin(), logits.end());
  softmax_inplace(out);
  return out;
}

void softmax_inplace(std::span<double> logits) {
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  double sum = 0.0;
  for (double& v : logits) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : logits) v /= sum;
}

int argmax(std::span<const double> values) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(values.size()); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

int sample_categorical(std::span<const double> probs, Rng& rng) {
  double total = 0.0;
  for (double p : probs) total += p;
  if (!(total > 0.0)) throw DataError("sample_categorical: distribution has no mass");
  const double u = u01(rng) * total;
  double cum = 0.0;
  int last_positive = -1;
  for (int i = 0; i < static_cast<int>(probs.size()); ++i) {
    if (probs[i] > 0.0) last_positive = i;
    cum += probs[i];
    if (u < cum) return probs[i] > 0.0 ? i : last_positive;
  }
  return last_positive;
}

double cross_entropy_grad(const Network& net, const Matrix& inputs,
                          std::span<const int> targets, Network& grads) {
  if (static_cast<int>(targets.size()) != inputs.rows())
    throw DataError("cross_entropy_grad: " + std::to_string(targets.size()) +
                    " targets for " + std::to_string(inputs.rows()) + " inputs");
  const int classes = net.output_dim();
  for (int t : targets)
    if (t < 0 || t >= classes)
      throw DataError("cross_entropy_grad: action index " + std::to_string(t) +
                      " out of range [0, " + std::to_string(classes) + ")");
  if (grads.layers.size() != net.layers.size()) grads = zeros_like(net);
  else zero_params(grads);

  Trace trace;
  const Matrix& logits = forward_with_trace(net, inputs, trace);
  const int batch = inputs.rows();
  Matrix dlogits(batch, classes);
  double loss = 0.0;
  std::vector<double> probs(classes);
  for (int i = 0; i < batch; ++i) {
    const double* row = logits.row(i);
    std::copy(row, row + classes, probs.begin());
    softmax_inplace(probs);
    loss += -std::log(std::max(probs[targets[i]], 1e-300));
    double* drow = dlogits.row(i);
    for (int j = 0; j < classes; ++j)
      drow[j] = (probs[j] - (j == targets[i] ? 1.0 : 0.0)) / batch;
  }
  loss /= batch;
  backward(net, trace, dlogits, grads);
  return loss;
}

std::vector<std::span<double>> param_blocks(Network& net) {
  std::vector<std::span<double>> blocks;
  for (Layer& layer : net.layers) {
    if (auto* dense = std::get_if<DenseLayer>(&layer)) {
      blocks.emplace_back(dense->weight.data());
      blocks.emplace_back(dense->bias);
    } else {
      auto& attn = std::get<SelfAttentionLayer>(layer);
      blocks.emplace_back(attn.wq.data());
      blocks.emplace_back(attn.wk.data());
      blocks.emplace_back(attn.wv.data());
      blocks.emplace_back(&attn.gamma, 1);
    }
  }
  return blocks;
}

std::vector<std::span<const double>> param_blocks(const Network& net) {
  std::vector<std::span<const double>> blocks;
  for (auto block : param_blocks(const_cast<Network&>(net)))
    blocks.emplace_back(block.data(), block.size());
  return blocks;
}

std::size_t param_count(const Network& net) {
  std::size_t n = 0;
  for (auto block : param_blocks(net)) n += block.size();
  return n;
}

Network zeros_like(const Network& net) {
  Network out = net;
  for (auto block : param_blocks(out)) std::fill(block.begin(), block.end(), 0.0);
  return out;
}

AdamState make_adam_state(const Network& net) {
  return AdamState{zeros_like(net), zeros_like(net), 0};
}

void adam_step(Network& params, const Network& grads, AdamState& state, double lr,
               double beta1, double beta2, double eps) {
  state.step += 1;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  auto p = param_blocks(params);
  auto g = param_blocks(const_cast<Network&>(grads));
  auto m = param_blocks(state.m);
  auto v = param_blocks(state.v);
  if (p.size() != g.size() || p.size() != m.size())
    throw ConfigError("adam_step: gradient shape does not match parameters");
  for (std::size_t b = 0; b < p.size(); ++b) {
    if (p[b].size() != g[b].size())
      throw ConfigError("adam_step: gradient shape does not match parameters");
    for (std::size_t i = 0; i < p[b].size(); ++i) {
      const double gi = g[b][i];
      m[b][i] = beta1 * m[b][i] + (1.0 - beta1) * gi;
      v[b][i] = beta2 * v[b][i] + (1.0 - beta2) * gi * gi;
      const double mhat = m[b][i] / bc1;
      const double vhat = v[b][i] / bc2;
      p[b][i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

TrainStats train_classifier(Network& net, const Matrix& inputs, std::span<const int> targets,
                            const TrainHyper& hyper, Rng& rng) {
  if (inputs.rows() == 0) throw DataError("train_classifier: empty dataset");
  AdamState state = make_adam_state(net);
  Network grads = zeros_like(net);
  std::vector<int> order(inputs.rows());
  std::iota(order.begin(), order.end(), 0);
  std::vector<int> batch_targets;
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    // Fisher-Yates with the deterministic uniform_below
    for (int i = static_cast<int>(order.size()) - 1; i > 0; --i)
      std::swap(order[i], order[uniform_below(rng, i + 1)]);
    for (int start = 0; start < static_cast<int>(order.size()); start += hyper.batch) {
      const int end = std::min<int>(start + hyper.batch, static_cast<int>(order.size()));
      std::span<const int> idx(order.data() + start, static_cast<std::size_t>(end - start));
      Matrix x = gather_rows(inputs, idx);
      batch_targets.clear();
      for (int i : idx) batch_targets.push_back(targets[i]);
      cross_entropy_grad(net, x, batch_targets, grads);
      adam_step(net, grads, state, hyper.lr);
    }
  }
  return dataset_stats(net, inputs, targets);
}

TrainStats dataset_stats(const Network& net, const Matrix& inputs,
                         std::span<const int> targets) {
  const int classes = net.output_dim();
  const int n = inputs.rows();
  TrainStats stats;
  int correct = 0;
  std::vector<double> probs(classes);
  constexpr int kChunk = 256;
  for (int start = 0; start < n; start += kChunk) {
    const int end = std::min(start + kChunk, n);
    Matrix x(end - start, inputs.cols());
    for (int i = start; i < end; ++i)
      std::copy(inputs.row(i), inputs.row(i) + inputs.cols(), x.row(i - start));
    Matrix logits = forward(net, x);
    for (int i = 0; i < logits.rows(); ++i) {
      const double* row = logits.row(i);
      std::copy(row, row + classes, probs.begin());
      softmax_inplace(probs);
      stats.loss += -std::log(std::max(probs[targets[start + i]], 1e-300));
      if (argmax(probs) == targets[start + i]) ++correct;
    }
  }
  stats.loss /= n;
  stats.accuracy = static_cast<double>(correct) / n;
  return stats;
}

}  // namespace ifolab::nn
