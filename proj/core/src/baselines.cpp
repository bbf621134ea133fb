#include "armlet/baselines.hpp"

#include <cmath>

#include "armlet/error.hpp"

namespace armlet {

FmParams init_lr_params(std::shared_ptr<const Schema> schema, std::uint64_t seed) {
  FmParams p;
  p.schema = std::move(schema);
  Rng rng(seed);
  p.linear = p.store.add("lr.w", normal_init(p.schema->embedding_rows(), 1, 0.01, rng));
  p.bias = p.store.add("lr.b", Tensor2(1, 1));
  return p;
}

FmParams init_fm_params(std::shared_ptr<const Schema> schema, std::size_t n_e,
                        std::uint64_t seed) {
  if (n_e < 1) throw Error(ErrorKind::kArgument, "FM latent size must be >= 1");
  FmParams p;
  p.schema = std::move(schema);
  p.n_e = n_e;
  Rng rng(seed);
  p.linear = p.store.add("lr.w", normal_init(p.schema->embedding_rows(), 1, 0.01, rng));
  p.bias = p.store.add("lr.b", Tensor2(1, 1));
  p.has_latent = true;
  p.latent = p.store.add("fm.v", normal_init(p.schema->embedding_rows(), n_e, 0.01, rng));
  return p;
}

FmParams init_fm_plus_params(std::shared_ptr<const Schema> schema, const ArmConfig& cfg,
                             std::uint64_t seed) {
  if (!(cfg.alpha >= 1.0)) throw Error(ErrorKind::kArgument, "alpha must be >= 1");
  const std::size_t m = schema->m();
  // Same stream as init_fm_params for the shared part, so the bank is the
  // only difference between FM and FM+neurons at a fixed seed.
  FmParams p = init_fm_params(std::move(schema), cfg.n_e, seed);
  p.alpha = cfg.alpha;
  p.exp_clamp = cfg.exp_clamp;
  p.neurons = cfg.fm_neurons;
  if (p.neurons > 0) {
    Rng rng(seed ^ 0x5bd1e995ULL);
    p.has_bank = true;
    p.bank = create_head(p.store, "bank", m, cfg.n_e, p.neurons, rng);
    p.readout = p.store.add("bank.readout", normal_init(1, p.neurons * cfg.n_e, 0.01, rng));
  }
  return p;
}

FmTrace fm_plus_forward_trace(const Instance& x, const FmParams& params) {
  FmTrace t;
  t.rows = field_rows(x, *params.schema);
  const auto& w = params.store[params.linear].value;
  double logit = params.store[params.bias].value[0];
  for (std::size_t j = 0; j < t.rows.rows.size(); ++j) logit += t.rows.scales[j] * w[t.rows.rows[j]];

  if (params.has_latent) {
    gather_embeddings(t.rows, params.store[params.latent].value, t.emb);
    const std::size_t m = t.emb.rows();
    t.sum.assign(params.n_e, 0.0);
    double pair = 0.0;
    for (std::size_t d = 0; d < params.n_e; ++d) {
      double s = 0.0, sq = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        const double e = t.emb(j, d);
        s += e;
        sq += e * e;
      }
      t.sum[d] = s;
      pair += s * s - sq;
    }
    logit += 0.5 * pair;
  }

  if (params.has_bank) {
    t.alignment = head_alignment(params.bank, params.store);
    head_gates(params.bank, params.store, t.alignment, t.emb, params.alpha, t.bank);
    exponential_neurons_into(t.emb, t.bank.weights, params.exp_clamp, t.bank.exponent,
                             t.bank.outputs);
    const auto r = params.store[params.readout].value.flat();
    const auto y = t.bank.outputs.flat();
    for (std::size_t i = 0; i < y.size(); ++i) logit += r[i] * y[i];
  }
  if (!std::isfinite(logit)) throw Error(ErrorKind::kForward, "non-finite FM logit");
  t.logit = logit;
  return t;
}

double lr_forward(const Instance& x, const FmParams& params) {
  return fm_plus_forward_trace(x, params).logit;
}

double fm_forward(const Instance& x, const FmParams& params) {
  if (!params.has_latent) throw Error(ErrorKind::kContract, "FM parameters have no latent table");
  return fm_plus_forward_trace(x, params).logit;
}

double fm_plus_neurons_forward(const Instance& x, const FmParams& params) {
  return fm_plus_forward_trace(x, params).logit;
}

void fm_backward(const FmTrace& trace, double dlogit, FmParams& params) {
  params.store[params.bias].grad[0] += dlogit;
  auto& dw = params.store[params.linear].grad;
  for (std::size_t j = 0; j < trace.rows.rows.size(); ++j)
    dw[trace.rows.rows[j]] += dlogit * trace.rows.scales[j];
  if (!params.has_latent) return;

  const std::size_t m = trace.emb.rows();
  Tensor2 d_emb(m, params.n_e);
  // d/de_jd of 0.5 * (S_d^2 - sum e^2) = S_d - e_jd
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t d = 0; d < params.n_e; ++d)
      d_emb(j, d) = dlogit * (trace.sum[d] - trace.emb(j, d));

  if (params.has_bank) {
    const auto r = params.store[params.readout].value.flat();
    auto dr = params.store[params.readout].grad.flat();
    const auto y = trace.bank.outputs.flat();
    Tensor2 d_out(params.neurons, params.n_e);
    for (std::size_t i = 0; i < y.size(); ++i) {
      dr[i] += dlogit * y[i];
      d_out[i] = dlogit * r[i];
    }
    head_backward(params.bank, params.store, trace.alignment, trace.emb, params.alpha,
                  params.exp_clamp, trace.bank, d_out, d_emb);
  }
  scatter_embedding_grad(trace.rows, d_emb, params.store[params.latent].grad);
}

}  // namespace armlet
