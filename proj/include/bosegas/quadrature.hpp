#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <vector>

#include "bosegas/common.hpp"

namespace bosegas {

// Adaptive Gauss-Kronrod (G7,K15) quadrature.  Bisects intervals until the
// embedded error estimate meets the requested absolute tolerance.

namespace detail {

// K15 abscissae on [0,1] side (symmetric), Kronrod weights, and the
// embedded G7 weights on the shared nodes (odd indices 1,3,5,7).
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
inline void gk15(const F &f, double a, double b, double &result, double &err) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double resk = 0.0, resg = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double x = kKronrodNodes[i] * h;
    double fv;
    if (i == 7) {
      fv = f(c);
      resk += kKronrodWeights[7] * fv;
      resg += kGaussWeights[3] * fv;
    } else {
      const double f1 = f(c - x);
      const double f2 = f(c + x);
      fv = f1 + f2;
      resk += kKronrodWeights[i] * fv;
      if (i % 2 == 1)
        resg += kGaussWeights[i / 2] * fv;
    }
  }
  result = resk * h;
  err = std::abs((resk - resg) * h);
}

} // namespace detail

struct QuadratureOptions {
  double abs_tol = 1.0e-12;
  double rel_tol = 1.0e-12;
  int max_depth = 48;
};

// Integrate f over [a,b].  Throws numerical_error naming the subinterval on
// non-finite values or tolerance failure.
template <class F>
inline double integrate(const F &f, double a, double b,
                        QuadratureOptions opt = {}) {
  if (a == b)
    return 0.0;
  struct Seg {
    double a, b, val, err;
    int depth;
  };
  double val0, err0;
  detail::gk15(f, a, b, val0, err0);
  std::vector<Seg> stack{{a, b, val0, err0, 0}};
  double total = 0.0;
  double total_err = 0.0;
  double worst_a = a, worst_b = b, worst_err = 0.0;
  while (!stack.empty()) {
    Seg s = stack.back();
    stack.pop_back();
    if (!std::isfinite(s.val)) {
      std::ostringstream os;
      os << "quadrature failure: non-finite value on [" << s.a << ", " << s.b << "]";
      throw numerical_error(os.str());
    }
    const double local_tol =
        std::max(opt.abs_tol * std::abs(s.b - s.a) / std::abs(b - a),
                 std::numeric_limits<double>::epsilon() * std::abs(s.val));
    if (s.err <= local_tol || s.depth >= opt.max_depth) {
      total += s.val;
      total_err += s.err;
      if (s.err > worst_err) {
        worst_err = s.err;
        worst_a = s.a;
        worst_b = s.b;
      }
      continue;
    }
    const double m = 0.5 * (s.a + s.b);
    double vl, el, vr, er;
    detail::gk15(f, s.a, m, vl, el);
    detail::gk15(f, m, s.b, vr, er);
    stack.push_back({s.a, m, vl, el, s.depth + 1});
    stack.push_back({m, s.b, vr, er, s.depth + 1});
  }
  if (total_err > 100.0 * std::max(opt.abs_tol, opt.rel_tol * std::abs(total))) {
    std::ostringstream os;
    os << "quadrature failure: total error " << total_err
       << " above tolerance, worst subinterval [" << worst_a << ", " << worst_b << "]";
    throw numerical_error(os.str());
  }
  return total;
}

// Integrate an oscillatory-decaying f over [a, inf): sums blocks of fixed
// length until a block falls below tol, with blocks short enough to resolve
// the oscillation period.
template <class F>
inline double integrate_to_infinity(const F &f, double a, double block,
                                    double tol = 1.0e-12, int max_blocks = 100000) {
  double total = 0.0;
  double x = a;
  int quiet = 0;
  for (int i = 0; i < max_blocks; ++i) {
    const double piece = integrate(f, x, x + block, {tol / 8, 1e-12, 40});
    total += piece;
    x += block;
    if (std::abs(piece) < tol)
      ++quiet;
    else
      quiet = 0;
    if (quiet >= 3)
      return total;
  }
  throw numerical_error("tail integration did not converge by x=" + std::to_string(x));
}

} // namespace bosegas
