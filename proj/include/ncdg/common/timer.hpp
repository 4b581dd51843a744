#pragma once

#include <array>
#include <chrono>
#include <string_view>
#include <vector>

namespace ncdg {

enum class Block : int { ExplicitResidual = 0, ImplicitFixedPoint, Krylov, GhostExchange, Output, Count };

constexpr std::array<std::string_view, static_cast<int>(Block::Count)> kBlockNames = {
    "explicit_residual", "implicit_fixed_point", "krylov", "ghost_exchange", "output"};

// Exclusive wall-clock time per algorithm block: entering a nested block
// pauses the enclosing one, so block times never overlap.
class BlockTimer {
public:
  using Clock = std::chrono::steady_clock;

  void push(Block b);
  void pop();
  double seconds(Block b) const { return totals_[static_cast<int>(b)]; }
  std::array<double, static_cast<int>(Block::Count)> totals() const { return totals_; }
  void reset();

private:
  struct Frame {
    Block block;
    Clock::time_point since;
  };
  std::vector<Frame> stack_;
  std::array<double, static_cast<int>(Block::Count)> totals_{};
};

class ScopedBlock {
public:
  ScopedBlock(BlockTimer* t, Block b) : t_(t) {
    if (t_)
      t_->push(b);
  }
  ~ScopedBlock() {
    if (t_)
      t_->pop();
  }
  ScopedBlock(const ScopedBlock&) = delete;
  ScopedBlock& operator=(const ScopedBlock&) = delete;

private:
  BlockTimer* t_;
};

} // namespace ncdg
