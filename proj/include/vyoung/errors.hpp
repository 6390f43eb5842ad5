#pragma once

#include <stdexcept>
#include <string>

namespace vyoung {

/// Argument outside the mathematical domain of an operation (s <= 0 for the
/// fBm kernel, H outside (0,1), invalid hypergeometric parameter c, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A power series failed to reach its stopping criterion within the term cap.
class SeriesDivergence : public std::runtime_error {
 public:
  SeriesDivergence(const std::string& what, int terms)
      : std::runtime_error(what), terms_(terms) {}
  int terms() const noexcept { return terms_; }

 private:
  int terms_;
};

/// Finite-difference step would fall below the representable floor.
class StepUnderflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Quadrature error estimate exceeded the configured tolerance.
class AccuracyError : public std::runtime_error {
 public:
  AccuracyError(const std::string& what, double estimate, double tolerance)
      : std::runtime_error(what), estimate_(estimate), tolerance_(tolerance) {}
  double estimate() const noexcept { return estimate_; }
  double tolerance() const noexcept { return tolerance_; }

 private:
  double estimate_;
  double tolerance_;
};

}  // namespace vyoung
