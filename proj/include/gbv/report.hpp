#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gbv {

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double ms() const {
    auto dt = std::chrono::steady_clock::now() - t0;
    return std::chrono::duration<double, std::milli>(dt).count();
  }
};

enum class Status { pass, fail, precondition_failed, unsupported };

inline const char* status_str(Status s) {
  switch (s) {
    case Status::pass:
      return "PASS";
    case Status::fail:
      return "FAIL";
    case Status::precondition_failed:
      return "PRECONDITION-FAILED";
    default:
      return "UNSUPPORTED";
  }
}

// Fixed identifier for the sign/ordering convention set documented in
// docs/conventions.md; bump only when a convention changes.
inline constexpr const char* kConventionTag = "gbv-conventions-1";

struct CheckReport {
  std::string check;
  Status status = Status::fail;
  // order in the fiber filtration (or hbar order) up to which the identity
  // was actually verified, when the check is order-by-order
  std::optional<int> verified_order;
  // up to ten leading (monomial, coefficient) pairs of the residual
  std::vector<std::pair<std::string, std::string>> residual;
  std::vector<std::string> notes;
  double timing_ms = 0.0;
  std::string convention = kConventionTag;

  bool passed() const { return status == Status::pass; }
  void note(std::string s) { notes.push_back(std::move(s)); }
};

}  // namespace gbv
