#include "armlet/layers.hpp"

#include <algorithm>
#include <cmath>

#include "armlet/entmax.hpp"
#include "armlet/error.hpp"

namespace armlet {

FieldRows field_rows(const Instance& x, const Schema& schema) {
  const std::size_t m = schema.m();
  if (x.features.size() != m) {
    throw Error(ErrorKind::kLookup, "instance has " + std::to_string(x.features.size()) +
                                        " fields, model expects " + std::to_string(m));
  }
  FieldRows fr;
  fr.rows.resize(m);
  fr.scales.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    const auto& f = schema.field(j);
    const auto& fv = x.features[j];
    if (f.categorical()) {
      if (fv.index == kUnknownCategory) {
        fr.rows[j] = schema.row_offset(j);
      } else {
        if (fv.index < 0 || static_cast<std::size_t>(fv.index) >= f.cardinality)
          throw Error(ErrorKind::kLookup, "field '" + f.name + "' index " +
                                              std::to_string(fv.index) +
                                              " outside the embedding table");
        fr.rows[j] = schema.row_offset(j) + 1 + static_cast<std::size_t>(fv.index);
      }
      fr.scales[j] = 1.0;
    } else {
      fr.rows[j] = schema.row_offset(j);
      fr.scales[j] = fv.value;
    }
  }
  return fr;
}

void gather_embeddings(const FieldRows& fr, const Tensor2& table, Tensor2& out) {
  const std::size_t m = fr.rows.size();
  const std::size_t n_e = table.cols();
  if (out.rows() != m || out.cols() != n_e) out = Tensor2(m, n_e);
  for (std::size_t j = 0; j < m; ++j) {
    if (fr.rows[j] >= table.rows()) throw Error(ErrorKind::kLookup, "embedding row out of range");
    const auto src = table.row(fr.rows[j]);
    auto dst = out.row(j);
    const double s = fr.scales[j];
    for (std::size_t d = 0; d < n_e; ++d) dst[d] = s * src[d];
  }
}

void scatter_embedding_grad(const FieldRows& fr, const Tensor2& d_out, Tensor2& grad) {
  for (std::size_t j = 0; j < fr.rows.size(); ++j) {
    auto dst = grad.row(fr.rows[j]);
    const auto src = d_out.row(j);
    const double s = fr.scales[j];
    for (std::size_t d = 0; d < dst.size(); ++d) dst[d] += s * src[d];
  }
}

Tensor2 xavier_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Tensor2 t(rows, cols);
  for (auto& v : t.flat()) v = rng.uniform(-bound, bound);
  return t;
}

Tensor2 normal_init(std::size_t rows, std::size_t cols, double stddev, Rng& rng) {
  Tensor2 t(rows, cols);
  for (auto& v : t.flat()) v = rng.normal(0.0, stddev);
  return t;
}

DenseStack DenseStack::create(ParamStore& store, const std::string& prefix, std::size_t in,
                              const std::vector<std::size_t>& hidden_widths, std::size_t out,
                              bool linear_output, double dropout, Rng& rng) {
  DenseStack net;
  net.dropout = dropout;
  std::size_t width = in;
  for (std::size_t l = 0; l < hidden_widths.size(); ++l) {
    const std::string name = prefix + std::to_string(l);
    Layer layer;
    layer.weight = store.add(name + ".W", xavier_uniform(hidden_widths[l], width, rng));
    layer.bias = store.add(name + ".b", Tensor2(hidden_widths[l], 1));
    net.hidden.push_back(layer);
    width = hidden_widths[l];
  }
  if (linear_output) {
    net.has_output = true;
    net.output.weight = store.add(prefix + "out.W", xavier_uniform(out, width, rng));
    net.output.bias = store.add(prefix + "out.b", Tensor2(out, 1));
  }
  return net;
}

namespace {

void affine(const Tensor2& w, const Tensor2& b, std::span<const double> in, std::vector<double>& out) {
  if (w.cols() != in.size()) throw Error(ErrorKind::kShape, "dense layer input width mismatch");
  out.assign(w.rows(), 0.0);
  for (std::size_t r = 0; r < w.rows(); ++r) {
    const auto wr = w.row(r);
    double s = b[r];
    for (std::size_t c = 0; c < in.size(); ++c) s += wr[c] * in[c];
    out[r] = s;
  }
}

void check_finite(std::span<const double> v, const std::string& layer) {
  for (double x : v)
    if (!std::isfinite(x)) throw Error(ErrorKind::kForward, "non-finite activation in " + layer);
}

// d_in = W^T d_pre; dW += d_pre in^T; db += d_pre
std::vector<double> affine_backward(ParamStore& store, const DenseStack::Layer& layer,
                                    std::span<const double> in, std::span<const double> d_pre) {
  const Tensor2& w = store[layer.weight].value;
  Tensor2& dw = store[layer.weight].grad;
  Tensor2& db = store[layer.bias].grad;
  std::vector<double> d_in(in.size(), 0.0);
  for (std::size_t r = 0; r < w.rows(); ++r) {
    const double g = d_pre[r];
    if (g == 0.0) continue;
    db[r] += g;
    auto dwr = dw.row(r);
    const auto wr = w.row(r);
    for (std::size_t c = 0; c < in.size(); ++c) {
      dwr[c] += g * in[c];
      d_in[c] += g * wr[c];
    }
  }
  return d_in;
}

}  // namespace

void dense_forward(const DenseStack& net, const ParamStore& store, std::vector<double> input,
                   Mode mode, Rng* rng, DenseTrace& trace) {
  trace.acts.clear();
  trace.masks.clear();
  trace.acts.push_back(std::move(input));
  const bool drop = mode == Mode::kTrain && net.dropout > 0.0;
  if (drop && rng == nullptr) throw Error(ErrorKind::kContract, "dropout needs an rng");
  const double keep = 1.0 - net.dropout;
  for (std::size_t l = 0; l < net.hidden.size(); ++l) {
    const auto& layer = net.hidden[l];
    std::vector<double> out;
    affine(store[layer.weight].value, store[layer.bias].value, trace.acts.back(), out);
    for (auto& v : out) v = std::max(v, 0.0);
    if (drop) {
      std::vector<double> mask(out.size());
      for (std::size_t i = 0; i < out.size(); ++i) {
        mask[i] = rng->next_double() < keep ? 1.0 / keep : 0.0;
        out[i] *= mask[i];
      }
      trace.masks.push_back(std::move(mask));
    }
    check_finite(out, store[layer.weight].name);
    trace.acts.push_back(std::move(out));
  }
  if (net.has_output) {
    std::vector<double> out;
    affine(store[net.output.weight].value, store[net.output.bias].value, trace.acts.back(), out);
    check_finite(out, store[net.output.weight].name);
    trace.acts.push_back(std::move(out));
  }
}

std::vector<double> dense_backward(const DenseStack& net, ParamStore& store,
                                   const DenseTrace& trace, std::span<const double> d_out) {
  const std::size_t expected = 1 + net.hidden.size() + (net.has_output ? 1 : 0);
  if (trace.acts.size() != expected)
    throw Error(ErrorKind::kContract, "dense trace is missing activations");
  std::vector<double> grad(d_out.begin(), d_out.end());
  std::size_t a = trace.acts.size() - 1;
  if (net.has_output) {
    grad = affine_backward(store, net.output, trace.acts[a - 1], grad);
    --a;
  }
  const bool dropped = !trace.masks.empty();
  for (std::size_t l = net.hidden.size(); l-- > 0;) {
    const auto& out = trace.acts[a];
    for (std::size_t i = 0; i < grad.size(); ++i) {
      // out > 0 iff the ReLU was active and the unit survived dropout.
      grad[i] = out[i] > 0.0 ? grad[i] * (dropped ? trace.masks[l][i] : 1.0) : 0.0;
    }
    grad = affine_backward(store, net.hidden[l], trace.acts[a - 1], grad);
    --a;
  }
  return grad;
}

NeuronHead create_head(ParamStore& store, const std::string& prefix, std::size_t m,
                       std::size_t n_e, std::size_t neurons, Rng& rng) {
  NeuronHead head;
  head.q = store.add(prefix + ".Q", normal_init(n_e, neurons, 0.01, rng));
  head.v = store.add(prefix + ".V", normal_init(m, neurons, 0.01, rng));
  head.w_att = store.add(prefix + ".W_att", xavier_uniform(n_e, n_e, rng));
  return head;
}

Tensor2 head_alignment(const NeuronHead& head, const ParamStore& store) {
  const Tensor2& q = store[head.q].value;      // n_e x o
  const Tensor2& w = store[head.w_att].value;  // n_e x n_e
  const std::size_t n_e = q.rows();
  const std::size_t o = q.cols();
  Tensor2 a(o, n_e);
  for (std::size_t i = 0; i < o; ++i)
    for (std::size_t c = 0; c < n_e; ++c) {
      const double qc = q(c, i);
      const auto wr = w.row(c);
      auto ar = a.row(i);
      for (std::size_t d = 0; d < n_e; ++d) ar[d] += qc * wr[d];
    }
  return a;
}

void head_gates(const NeuronHead& head, const ParamStore& store, const Tensor2& alignment,
                const Tensor2& emb, double alpha, HeadTrace& trace) {
  const Tensor2& v = store[head.v].value;  // m x o
  const std::size_t o = alignment.rows();
  const std::size_t m = emb.rows();
  if (alignment.cols() != emb.cols() || v.rows() != m || v.cols() != o)
    throw Error(ErrorKind::kShape, "attention head shapes do not conform");
  trace.scores = Tensor2(o, m);
  trace.gates = Tensor2(o, m);
  trace.weights = Tensor2(o, m);
  for (std::size_t i = 0; i < o; ++i) {
    const auto ai = alignment.row(i);
    auto si = trace.scores.row(i);
    for (std::size_t j = 0; j < m; ++j) {
      const auto ej = emb.row(j);
      double s = 0.0;
      for (std::size_t d = 0; d < ej.size(); ++d) s += ai[d] * ej[d];
      si[j] = s;
    }
    entmax_into(si, alpha, trace.gates.row(i));
    const auto zi = trace.gates.row(i);
    auto wi = trace.weights.row(i);
    for (std::size_t j = 0; j < m; ++j) wi[j] = zi[j] * v(j, i);
  }
}

void exponential_neurons_into(const Tensor2& emb, const Tensor2& weights, double clamp,
                              Tensor2& exponent, Tensor2& outputs) {
  const std::size_t o = weights.rows();
  const std::size_t m = weights.cols();
  const std::size_t n_e = emb.cols();
  if (emb.rows() != m) throw Error(ErrorKind::kShape, "exponential neuron shapes do not conform");
  exponent = Tensor2(o, n_e);
  outputs = Tensor2(o, n_e);
  for (std::size_t i = 0; i < o; ++i) {
    auto si = exponent.row(i);
    const auto wi = weights.row(i);
    for (std::size_t j = 0; j < m; ++j) {
      const double w = wi[j];
      if (w == 0.0) continue;
      const auto ej = emb.row(j);
      for (std::size_t d = 0; d < n_e; ++d) si[d] += w * ej[d];
    }
    auto yi = outputs.row(i);
    for (std::size_t d = 0; d < n_e; ++d) yi[d] = std::exp(std::clamp(si[d], -clamp, clamp));
  }
}

void head_backward(const NeuronHead& head, ParamStore& store, const Tensor2& alignment,
                   const Tensor2& emb, double alpha, double clamp, const HeadTrace& trace,
                   const Tensor2& d_outputs, Tensor2& d_emb) {
  const Tensor2& v = store[head.v].value;
  Tensor2& dv = store[head.v].grad;
  const std::size_t o = alignment.rows();
  const std::size_t m = emb.rows();
  const std::size_t n_e = emb.cols();
  if (trace.outputs.rows() != o || trace.gates.rows() != o)
    throw Error(ErrorKind::kContract, "head trace is missing intermediates");

  Tensor2 d_align(o, n_e);
  std::vector<double> ds(n_e), dw(m), dz(m), dscore(m);
  for (std::size_t i = 0; i < o; ++i) {
    const auto yi = trace.outputs.row(i);
    const auto si = trace.exponent.row(i);
    const auto dyi = d_outputs.row(i);
    // Clamped coordinates pass no gradient.
    for (std::size_t d = 0; d < n_e; ++d)
      ds[d] = std::abs(si[d]) < clamp ? dyi[d] * yi[d] : 0.0;

    const auto wi = trace.weights.row(i);
    const auto zi = trace.gates.row(i);
    for (std::size_t j = 0; j < m; ++j) {
      const auto ej = emb.row(j);
      auto dej = d_emb.row(j);
      double acc = 0.0;
      for (std::size_t d = 0; d < n_e; ++d) {
        acc += ds[d] * ej[d];
        dej[d] += wi[j] * ds[d];
      }
      dw[j] = acc;
      dz[j] = acc * v(j, i);
      dv(j, i) += acc * zi[j];
    }

    entmax_jvp_into(zi, alpha, dz, dscore);
    const auto ai = alignment.row(i);
    auto dai = d_align.row(i);
    for (std::size_t j = 0; j < m; ++j) {
      const double g = dscore[j];
      if (g == 0.0) continue;
      const auto ej = emb.row(j);
      auto dej = d_emb.row(j);
      for (std::size_t d = 0; d < n_e; ++d) {
        dai[d] += g * ej[d];
        dej[d] += g * ai[d];
      }
    }
  }

  // alignment = Q^T W_att
  const Tensor2& q = store[head.q].value;
  const Tensor2& w = store[head.w_att].value;
  Tensor2& dq = store[head.q].grad;
  Tensor2& dwatt = store[head.w_att].grad;
  for (std::size_t c = 0; c < n_e; ++c) {
    const auto wr = w.row(c);
    auto dwr = dwatt.row(c);
    for (std::size_t i = 0; i < o; ++i) {
      const auto dai = d_align.row(i);
      double acc = 0.0;
      for (std::size_t d = 0; d < n_e; ++d) acc += dai[d] * wr[d];
      dq(c, i) += acc;
      const double qci = q(c, i);
      if (qci == 0.0) continue;
      for (std::size_t d = 0; d < n_e; ++d) dwr[d] += qci * dai[d];
    }
  }
}

}  // namespace armlet
