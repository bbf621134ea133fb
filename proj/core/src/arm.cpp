#include "armlet/arm.hpp"

#include <cmath>

#include "armlet/error.hpp"

namespace armlet {

namespace {

std::vector<std::size_t> with_tail(std::vector<std::size_t> widths, std::size_t tail) {
  widths.push_back(tail);
  return widths;
}

void add_dnn(ArmParams& p, Rng& rng) {
  const auto& cfg = p.cfg;
  const auto& schema = *p.schema;
  p.layout.has_dnn = true;
  p.layout.dnn_embedding =
      p.store.add("dnn.emb", normal_init(schema.embedding_rows(), cfg.n_e, 0.01, rng));
  p.layout.dnn = DenseStack::create(p.store, "dnn", schema.m() * cfg.n_e, cfg.dnn_widths,
                                    cfg.n_p, true, cfg.dropout, rng);
}

const Tensor2& alignment_for(const ArmParams& params, const AttentionCache* cache,
                             std::size_t k, Tensor2& scratch) {
  if (cache) return cache->alignment.at(k);
  scratch = head_alignment(params.layout.heads[k], params.store);
  return scratch;
}

}  // namespace

ArmParams init_params(const ArmConfig& cfg, std::shared_ptr<const Schema> schema,
                      std::uint64_t seed, bool with_ensemble) {
  cfg.validate();
  ArmParams p;
  p.cfg = cfg;
  p.schema = std::move(schema);
  const std::size_t m = p.schema->m();
  Rng rng(seed);
  auto& layout = p.layout;
  layout.embedding = p.store.add("emb", normal_init(p.schema->embedding_rows(), cfg.n_e, 0.01, rng));
  for (std::size_t k = 0; k < cfg.heads; ++k)
    layout.heads.push_back(
        create_head(p.store, "head" + std::to_string(k), m, cfg.n_e, cfg.neurons, rng));
  layout.mlp = DenseStack::create(p.store, "mlp", cfg.heads * cfg.neurons * cfg.n_e,
                                  with_tail(cfg.mlp_widths, cfg.n_h), cfg.n_p, true,
                                  cfg.dropout, rng);
  if (with_ensemble) {
    add_dnn(p, rng);
    layout.ens_w1 = p.store.add("ens.w1", Tensor2(1, 1, 0.5));
    layout.ens_w2 = p.store.add("ens.w2", Tensor2(1, 1, 0.5));
    layout.ens_bias = p.store.add("ens.b", Tensor2(cfg.n_p, 1));
  }
  return p;
}

ArmParams init_dnn_params(const ArmConfig& cfg, std::shared_ptr<const Schema> schema,
                          std::uint64_t seed) {
  cfg.validate();
  ArmParams p;
  p.cfg = cfg;
  p.schema = std::move(schema);
  p.layout.has_arm = false;
  Rng rng(seed);
  add_dnn(p, rng);
  return p;
}

AttentionCache build_attention_cache(const ArmParams& params) {
  AttentionCache cache;
  for (const auto& head : params.layout.heads)
    cache.alignment.push_back(head_alignment(head, params.store));
  return cache;
}

Tensor2 embed_fields(const Instance& x, const ArmParams& params) {
  Tensor2 out;
  gather_embeddings(field_rows(x, *params.schema), params.store[params.layout.embedding].value, out);
  return out;
}

GateResult gated_attention(const Tensor2& emb, std::size_t head, const ArmParams& params) {
  if (head >= params.layout.heads.size()) throw Error(ErrorKind::kArgument, "no such head");
  const auto& h = params.layout.heads[head];
  HeadTrace trace;
  head_gates(h, params.store, head_alignment(h, params.store), emb, params.cfg.alpha, trace);
  return {std::move(trace.gates), std::move(trace.weights)};
}

Tensor2 exponential_neurons(const Tensor2& emb, const Tensor2& weights, double clamp) {
  Tensor2 exponent, outputs;
  exponential_neurons_into(emb, weights, clamp, exponent, outputs);
  return outputs;
}

ForwardTrace arm_forward(const Instance& x, const ArmParams& params, Mode mode, Rng* rng,
                         const AttentionCache* cache) {
  if (!params.layout.has_arm) throw Error(ErrorKind::kContract, "parameters have no ARM branch");
  const auto& cfg = params.cfg;
  ForwardTrace t;
  t.mode = mode;
  t.rows = field_rows(x, *params.schema);
  gather_embeddings(t.rows, params.store[params.layout.embedding].value, t.emb);

  const std::size_t K = params.layout.heads.size();
  const std::size_t block = cfg.neurons * cfg.n_e;
  std::vector<double> y(K * block);
  t.heads.resize(K);
  Tensor2 scratch;
  for (std::size_t k = 0; k < K; ++k) {
    const Tensor2& align = alignment_for(params, cache, k, scratch);
    auto& ht = t.heads[k];
    head_gates(params.layout.heads[k], params.store, align, t.emb, cfg.alpha, ht);
    exponential_neurons_into(t.emb, ht.weights, cfg.exp_clamp, ht.exponent, ht.outputs);
    const auto flat = ht.outputs.flat();
    for (double v : flat)
      if (!std::isfinite(v))
        throw Error(ErrorKind::kForward, "non-finite exponential neuron in head" + std::to_string(k));
    std::copy(flat.begin(), flat.end(), y.begin() + static_cast<std::ptrdiff_t>(k * block));
  }
  dense_forward(params.layout.mlp, params.store, std::move(y), mode, rng, t.mlp);
  t.logits = t.mlp.acts.back();
  return t;
}

void arm_backward(const ForwardTrace& trace, std::span<const double> dlogits, ArmParams& params,
                  const AttentionCache* cache) {
  const auto& cfg = params.cfg;
  const std::size_t K = params.layout.heads.size();
  if (trace.heads.size() != K || trace.mlp.acts.empty())
    throw Error(ErrorKind::kContract, "forward trace is missing intermediates");
  if (dlogits.size() != cfg.n_p) throw Error(ErrorKind::kShape, "dlogits length != n_p");

  const auto dy = dense_backward(params.layout.mlp, params.store, trace.mlp, dlogits);
  const std::size_t block = cfg.neurons * cfg.n_e;
  Tensor2 d_emb(trace.emb.rows(), trace.emb.cols());
  Tensor2 d_out(cfg.neurons, cfg.n_e);
  Tensor2 scratch;
  for (std::size_t k = 0; k < K; ++k) {
    std::copy(dy.begin() + static_cast<std::ptrdiff_t>(k * block),
              dy.begin() + static_cast<std::ptrdiff_t>((k + 1) * block), d_out.flat().begin());
    const Tensor2& align = alignment_for(params, cache, k, scratch);
    head_backward(params.layout.heads[k], params.store, align, trace.emb, cfg.alpha,
                  cfg.exp_clamp, trace.heads[k], d_out, d_emb);
  }
  scatter_embedding_grad(trace.rows, d_emb, params.store[params.layout.embedding].grad);
}

DnnTrace dnn_forward(const Instance& x, const ArmParams& params, Mode mode, Rng* rng) {
  if (!params.layout.has_dnn) throw Error(ErrorKind::kContract, "parameters have no DNN branch");
  DnnTrace t;
  t.rows = field_rows(x, *params.schema);
  Tensor2 emb;
  gather_embeddings(t.rows, params.store[params.layout.dnn_embedding].value, emb);
  const auto flat = emb.flat();
  dense_forward(params.layout.dnn, params.store, std::vector<double>(flat.begin(), flat.end()),
                mode, rng, t.net);
  t.logits = t.net.acts.back();
  return t;
}

void dnn_backward(const DnnTrace& trace, std::span<const double> dlogits, ArmParams& params) {
  if (dlogits.size() != params.cfg.n_p) throw Error(ErrorKind::kShape, "dlogits length != n_p");
  const auto d_in = dense_backward(params.layout.dnn, params.store, trace.net, dlogits);
  Tensor2 d_emb(trace.rows.rows.size(), params.cfg.n_e);
  std::copy(d_in.begin(), d_in.end(), d_emb.flat().begin());
  scatter_embedding_grad(trace.rows, d_emb, params.store[params.layout.dnn_embedding].grad);
}

EnsembleTrace ensemble_forward(const Instance& x, const ArmParams& params, Mode mode, Rng* rng,
                               const AttentionCache* cache) {
  if (!params.layout.has_dnn || !params.layout.has_arm)
    throw Error(ErrorKind::kContract, "ensemble needs both ARM and DNN branches");
  EnsembleTrace t;
  t.arm = arm_forward(x, params, mode, rng, cache);
  t.dnn = dnn_forward(x, params, mode, rng);
  const double w1 = params.store[params.layout.ens_w1].value[0];
  const double w2 = params.store[params.layout.ens_w2].value[0];
  const auto& b = params.store[params.layout.ens_bias].value;
  t.logits.resize(params.cfg.n_p);
  for (std::size_t p = 0; p < t.logits.size(); ++p)
    t.logits[p] = w1 * t.arm.logits[p] + w2 * t.dnn.logits[p] + b[p];
  return t;
}

void ensemble_backward(const EnsembleTrace& trace, std::span<const double> dlogits,
                       ArmParams& params, const AttentionCache* cache) {
  const auto& layout = params.layout;
  const std::size_t n_p = params.cfg.n_p;
  if (dlogits.size() != n_p) throw Error(ErrorKind::kShape, "dlogits length != n_p");
  const double w1 = params.store[layout.ens_w1].value[0];
  const double w2 = params.store[layout.ens_w2].value[0];
  std::vector<double> d_arm(n_p), d_dnn(n_p);
  double g1 = 0.0, g2 = 0.0;
  auto& db = params.store[layout.ens_bias].grad;
  for (std::size_t p = 0; p < n_p; ++p) {
    g1 += dlogits[p] * trace.arm.logits[p];
    g2 += dlogits[p] * trace.dnn.logits[p];
    db[p] += dlogits[p];
    d_arm[p] = w1 * dlogits[p];
    d_dnn[p] = w2 * dlogits[p];
  }
  params.store[layout.ens_w1].grad[0] += g1;
  params.store[layout.ens_w2].grad[0] += g2;
  arm_backward(trace.arm, d_arm, params, cache);
  dnn_backward(trace.dnn, d_dnn, params);
}

}  // namespace armlet
