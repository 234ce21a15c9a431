#pragma once

#include <cstdint>

namespace asmlp {

/// Counts multiply-accumulates performed by projection primitives while in scope.
/// Scopes nest per thread; a charge is added to every enclosing counter.
class MacCounter {
 public:
  MacCounter() : parent_(current_) { current_ = this; }
  ~MacCounter() { current_ = parent_; }
  MacCounter(const MacCounter&) = delete;
  MacCounter& operator=(const MacCounter&) = delete;

  std::uint64_t total() const noexcept { return total_; }
  void reset() noexcept { total_ = 0; }

  static void charge(std::uint64_t macs) noexcept {
    for (MacCounter* c = current_; c != nullptr; c = c->parent_) c->total_ += macs;
  }

 private:
  MacCounter* parent_;
  std::uint64_t total_ = 0;
  static inline thread_local MacCounter* current_ = nullptr;
};

}  // namespace asmlp
