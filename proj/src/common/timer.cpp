#include "ncdg/common/timer.hpp"

namespace ncdg {

void BlockTimer::push(Block b) {
  const auto now = Clock::now();
  if (!stack_.empty()) {
    auto& top = stack_.back();
    totals_[static_cast<int>(top.block)] += std::chrono::duration<double>(now - top.since).count();
  }
  stack_.push_back({b, now});
}

void BlockTimer::pop() {
  const auto now = Clock::now();
  const Frame f = stack_.back();
  stack_.pop_back();
  totals_[static_cast<int>(f.block)] += std::chrono::duration<double>(now - f.since).count();
  if (!stack_.empty())
    stack_.back().since = now;
}

void BlockTimer::reset() {
  stack_.clear();
  totals_.fill(0.0);
}

} // namespace ncdg
