#pragma once

#include <chrono>
#include <cstdint>
#include <string>

namespace mapfast {

// How solver time is measured. Wall uses a steady clock; Work converts a
// deterministic work counter (search expansions, SAT propagations) into
// seconds so that runtimes, timeouts and labels are reproducible.
enum class ClockKind { Wall, Work };

std::string to_string(ClockKind kind);
ClockKind clock_from_string(const std::string& name);

class Budget {
 public:
  static constexpr double kWorkUnitsPerSecond = 1.0e6;

  explicit Budget(double seconds, ClockKind kind = ClockKind::Wall)
      : limit_(seconds), kind_(kind), start_(std::chrono::steady_clock::now()) {}

  void charge(std::uint64_t units) { work_ += units; }
  std::uint64_t work() const { return work_; }

  double elapsed() const {
    if (kind_ == ClockKind::Work) return static_cast<double>(work_) / kWorkUnitsPerSecond;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }
  bool expired() const { return elapsed() >= limit_; }

  double limit() const { return limit_; }
  ClockKind kind() const { return kind_; }

 private:
  double limit_;
  ClockKind kind_;
  std::chrono::steady_clock::time_point start_;
  std::uint64_t work_ = 0;
};

}  // namespace mapfast
