#include "armlet/param_store.hpp"

#include <algorithm>
#include <cmath>

#include "armlet/error.hpp"

namespace armlet {

std::size_t ParamStore::add(std::string name, Tensor2 init) {
  if (find(name)) throw Error(ErrorKind::kContract, "duplicate parameter '" + name + "'");
  if (!init.all_finite()) throw Error(ErrorKind::kNumeric, "non-finite init for '" + name + "'");
  Param p;
  p.grad = Tensor2(init.rows(), init.cols());
  p.moment1 = Tensor2(init.rows(), init.cols());
  p.moment2 = Tensor2(init.rows(), init.cols());
  p.value = std::move(init);
  p.name = std::move(name);
  params_.push_back(std::move(p));
  return params_.size() - 1;
}

std::optional<std::size_t> ParamStore::find(const std::string& name) const {
  for (std::size_t i = 0; i < params_.size(); ++i)
    if (params_[i].name == name) return i;
  return std::nullopt;
}

Param& ParamStore::at(const std::string& name) {
  auto idx = find(name);
  if (!idx) throw Error(ErrorKind::kLookup, "no parameter named '" + name + "'");
  return params_[*idx];
}

const Param& ParamStore::at(const std::string& name) const {
  auto idx = find(name);
  if (!idx) throw Error(ErrorKind::kLookup, "no parameter named '" + name + "'");
  return params_[*idx];
}

void ParamStore::zero_grad() {
  for (auto& p : params_) p.grad.fill(0.0);
}

std::size_t ParamStore::num_scalars() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void ParamStore::copy_values_from(const ParamStore& other) {
  if (other.size() != size()) throw Error(ErrorKind::kShape, "parameter count mismatch");
  for (std::size_t i = 0; i < size(); ++i) {
    if (!params_[i].value.same_shape(other[i].value))
      throw Error(ErrorKind::kShape, "shape mismatch for '" + params_[i].name + "'");
    params_[i].value = other[i].value;
  }
}

void adam_step(ParamStore& store, const AdamConfig& cfg) {
  for (const auto& p : store) {
    if (!p.grad.all_finite())
      throw Error(ErrorKind::kOptimizer, "non-finite gradient in '" + p.name + "'");
  }
  store.advance_step();
  const double t = static_cast<double>(store.step());
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (auto& p : store) {
    auto value = p.value.flat();
    auto grad = p.grad.flat();
    auto m1 = p.moment1.flat();
    auto m2 = p.moment2.flat();
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double g = grad[i];
      m1[i] = cfg.beta1 * m1[i] + (1.0 - cfg.beta1) * g;
      m2[i] = cfg.beta2 * m2[i] + (1.0 - cfg.beta2) * g * g;
      const double m_hat = m1[i] / bc1;
      const double v_hat = m2[i] / bc2;
      value[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
      grad[i] = 0.0;
    }
  }
}

std::vector<Tensor2> finite_diff_grad(const std::function<double(const ParamStore&)>& f,
                                      ParamStore& store, double h,
                                      std::span<const std::size_t> only) {
  if (!(h > 0.0)) throw Error(ErrorKind::kArgument, "finite difference step must be > 0");
  std::vector<Tensor2> out;
  out.reserve(store.size());
  for (std::size_t pi = 0; pi < store.size(); ++pi) {
    Tensor2 g(store[pi].value.rows(), store[pi].value.cols());
    const bool selected =
        only.empty() || std::find(only.begin(), only.end(), pi) != only.end();
    if (selected) {
      for (std::size_t i = 0; i < g.size(); ++i) {
        double& slot = store[pi].value[i];
        const double saved = slot;
        slot = saved + h;
        const double up = f(store);
        slot = saved - h;
        const double down = f(store);
        slot = saved;
        if (!std::isfinite(up) || !std::isfinite(down)) {
          throw Error(ErrorKind::kNumeric, "finite-difference oracle hit a non-finite value in '" +
                                               store[pi].name + "'");
        }
        g[i] = (up - down) / (2.0 * h);
      }
    }
    out.push_back(std::move(g));
  }
  return out;
}

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1e-8, std::abs(analytic) + std::abs(numeric));
}

}  // namespace armlet
