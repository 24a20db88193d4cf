#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace srd {

/// Thrown when an argument lies outside the domain of a function or a
/// distribution parameter violates its invariants.
class domain_error : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Thrown when a numerical procedure cannot reach its requested accuracy.
class accuracy_error : public std::runtime_error {
public:
  accuracy_error(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

private:
  double achieved_;
};

/// Thrown when a requested computation would exceed its work budget.
class budget_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool cond, const char* msg) {
  if (!cond) throw domain_error(msg);
}

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw domain_error(msg);
}

}  // namespace detail

inline constexpr double pi = std::numbers::pi;
inline constexpr double e = std::numbers::e;

}  // namespace srd
