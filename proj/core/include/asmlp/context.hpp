#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "asmlp/tape.hpp"

namespace asmlp {

using Rng = std::mt19937_64;

/// Independent deterministic stream for (seed, stream id), e.g. one per epoch.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

/// Uniform in [lo, hi).
template <std::floating_point T>
Tensor<T> random_uniform(Shape dims, Rng& rng, T lo = T(-1), T hi = T(1)) {
  Tensor<T> t(std::move(dims));
  std::uniform_real_distribution<double> dist(static_cast<double>(lo), static_cast<double>(hi));
  for (auto& v : t.data()) v = static_cast<T>(dist(rng));
  return t;
}

/// Normal(0, std) resampled until it falls inside +-2 std.
template <std::floating_point T>
Tensor<T> trunc_normal(Shape dims, Rng& rng, double std_dev = 0.02) {
  Tensor<T> t(std::move(dims));
  std::normal_distribution<double> dist(0.0, std_dev);
  for (auto& v : t.data()) {
    double s = dist(rng);
    while (std::abs(s) > 2.0 * std_dev) s = dist(rng);
    v = static_cast<T>(s);
  }
  return t;
}

/// Everything a forward pass needs besides the input: the tape, the mode, the
/// randomness source for DropPath, and the parameter-to-leaf binding.
template <std::floating_point T>
class Context {
 public:
  explicit Context(Tape<T>& tape, bool training = false, Rng* rng = nullptr,
                   bool params_require_grad = true)
      : tape_(tape), training_(training), rng_(rng), params_require_grad_(params_require_grad) {}

  Tape<T>& tape() noexcept { return tape_; }
  bool training() const noexcept { return training_; }
  Rng* rng() noexcept { return rng_; }

  /// Places a parameter on the tape once per pass; later uses reuse the same leaf.
  Var<T> param(const Tensor<T>& p) {
    auto it = bound_.find(&p);
    if (it != bound_.end()) return it->second;
    Var<T> v = tape_.leaf(p, params_require_grad_);
    bound_.emplace(&p, v);
    order_.push_back(&p);
    return v;
  }

  /// Leaf bound to `p` in this pass, or an invalid Var if `p` was never used.
  Var<T> bound(const Tensor<T>& p) const {
    auto it = bound_.find(&p);
    return it == bound_.end() ? Var<T>{} : it->second;
  }

  const std::vector<const Tensor<T>*>& bound_params() const noexcept { return order_; }

  /// Called by multi-section forwards (embedding, merging, blocks, head) as each
  /// section starts; instrumentation uses it to attribute costs.
  using SectionHook = std::function<void(std::size_t stage, std::string_view section)>;
  void set_section_hook(SectionHook hook) { hook_ = std::move(hook); }
  void mark(std::size_t stage, std::string_view section) {
    if (hook_) hook_(stage, section);
  }

 private:
  Tape<T>& tape_;
  bool training_;
  Rng* rng_;
  bool params_require_grad_;
  std::unordered_map<const Tensor<T>*, Var<T>> bound_;
  std::vector<const Tensor<T>*> order_;
  SectionHook hook_;
};

}  // namespace asmlp
