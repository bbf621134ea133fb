#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "armlet/tensor.hpp"

namespace armlet {

struct Param {
  std::string name;
  Tensor2 value;
  Tensor2 grad;
  Tensor2 moment1;
  Tensor2 moment2;
};

/// Named parameters with parallel gradient and Adam moment buffers.
class ParamStore {
 public:
  /// Registers a parameter; gradient and moments start at zero.
  std::size_t add(std::string name, Tensor2 init);

  std::size_t size() const { return params_.size(); }
  Param& operator[](std::size_t i) { return params_[i]; }
  const Param& operator[](std::size_t i) const { return params_[i]; }
  Param& at(const std::string& name);
  const Param& at(const std::string& name) const;
  std::optional<std::size_t> find(const std::string& name) const;

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  std::int64_t step() const { return step_; }
  void set_step(std::int64_t t) { step_ = t; }
  void advance_step() { ++step_; }

  void zero_grad();
  std::size_t num_scalars() const;
  /// Copies values only; gradients and moments of `this` are left alone.
  void copy_values_from(const ParamStore& other);

 private:
  std::vector<Param> params_;
  std::int64_t step_ = 0;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One bias-corrected Adam update over every parameter, then zeroes the
/// gradients. A non-finite gradient aborts before anything is modified.
void adam_step(ParamStore& store, const AdamConfig& cfg);

/// Central differences (f(θ+h) - f(θ-h)) / 2h for every coordinate of the
/// selected parameters (all of them when `only` is empty). The store is
/// restored bit-exactly after each probe.
std::vector<Tensor2> finite_diff_grad(const std::function<double(const ParamStore&)>& f,
                                      ParamStore& store, double h,
                                      std::span<const std::size_t> only = {});

/// |a - n| / max(1e-8, |a| + |n|)
double relative_error(double analytic, double numeric);

}  // namespace armlet
