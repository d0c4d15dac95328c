#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace bosegas {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

// Thrown when a caller violates a documented precondition (CLI exit code 2).
struct precondition_error : std::runtime_error {
  explicit precondition_error(const std::string &msg) : std::runtime_error(msg) {}
};

// Thrown when a solver or quadrature fails to reach its tolerance (CLI exit code 3).
struct numerical_error : std::runtime_error {
  explicit numerical_error(const std::string &msg) : std::runtime_error(msg) {}
};

inline void require(bool cond, const std::string &msg) {
  if (!cond)
    throw precondition_error(msg);
}

// sin(x)/x with the x->0 limit.
inline double sinc(double x) {
  if (std::abs(x) < 1.0e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0));
  }
  return std::sin(x) / x;
}

// (sin x - x cos x)/x^3, stable for small x; appears in every radial
// Fourier transform of a compactly supported function.
inline double sin_minus_xcos_over_x3(double x) {
  const double ax = std::abs(x);
  if (ax < 0.5) {
    // alternating series 1/3 - x^2/30 + x^4/840 - x^6/45360 + ...
    const double x2 = x * x;
    double term = 1.0 / 3.0;
    double sum = term;
    // term_{k+1}/term_k = -x^2 / ((2k+2)(2k+5)), k = 0,1,...
    for (int k = 0; k < 12; ++k) {
      term *= -x2 / ((2.0 * k + 2.0) * (2.0 * k + 5.0));
      sum += term;
      if (std::abs(term) < 1e-18 * std::abs(sum))
        break;
    }
    return sum;
  }
  return (std::sin(x) - x * std::cos(x)) / (x * x * x);
}

} // namespace bosegas
