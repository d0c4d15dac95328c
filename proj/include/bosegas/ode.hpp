#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <sstream>
#include <vector>

#include "bosegas/common.hpp"

namespace bosegas {

// Adaptive Dormand-Prince 5(4) integrator for the 2-component radial systems
// u'' = g(r) u, written as y = (u, u').  Accepted nodes are stored with both
// components so profiles can be Hermite-interpolated afterwards.

struct OdeNode {
  double r;
  double u;
  double du;
};

struct OdeOptions {
  double rel_tol = 1.0e-10;
  double abs_tol = 1.0e-13;
  double max_step = 0.0; // 0 = no cap
  std::size_t max_steps = 2'000'000;
};

namespace detail {

struct Vec2 {
  double a, b;
};
inline Vec2 operator+(Vec2 x, Vec2 y) { return {x.a + y.a, x.b + y.b}; }
inline Vec2 operator*(double s, Vec2 x) { return {s * x.a, s * x.b}; }

} // namespace detail

// Integrate u'' = g(r)*u from r0 to r1 (r1 > r0) with initial (u0, du0).
// Returns the accepted-node trajectory, final node last.
template <class G>
inline std::vector<OdeNode> integrate_radial(const G &g, double r0, double r1,
                                             double u0, double du0,
                                             OdeOptions opt = {}) {
  using detail::Vec2;
  auto rhs = [&g](double r, Vec2 y) -> Vec2 { return {y.b, g(r) * y.a}; };

  // Dormand-Prince tableau
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                          c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                          e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;

  std::vector<OdeNode> out;
  double r = r0;
  Vec2 y{u0, du0};
  out.push_back({r, y.a, y.b});
  if (r1 <= r0)
    return out;

  // a default step cap keeps the node spacing fine enough for the cubic
  // Hermite profile interpolation downstream
  if (opt.max_step <= 0.0)
    opt.max_step = (r1 - r0) / 32.0;

  double h = std::min((r1 - r0) / 64.0, opt.max_step);
  Vec2 k1 = rhs(r, y);

  for (std::size_t steps = 0; steps < opt.max_steps; ++steps) {
    if (r >= r1)
      return out;
    h = std::min(h, r1 - r);
    if (h < 1e-15 * std::max(1.0, std::abs(r))) {
      std::ostringstream os;
      os << "ODE step size underflow at r=" << r;
      throw numerical_error(os.str());
    }
    const Vec2 k2 = rhs(r + c2 * h, y + (h * a21) * k1);
    const Vec2 k3 = rhs(r + c3 * h, y + h * (a31 * k1 + a32 * k2));
    const Vec2 k4 = rhs(r + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Vec2 k5 =
        rhs(r + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Vec2 k6 = rhs(
        r + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Vec2 ynew =
        y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Vec2 k7 = rhs(r + h, ynew);
    const Vec2 errv =
        h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    const double sca =
        opt.abs_tol +
        opt.rel_tol * std::max({std::abs(y.a), std::abs(y.b),
                                std::abs(ynew.a), std::abs(ynew.b), 1e-300});
    const double err = std::max(std::abs(errv.a), std::abs(errv.b)) / sca;

    if (err <= 1.0) {
      r += h;
      y = ynew;
      k1 = k7;
      out.push_back({r, y.a, y.b});
    }
    double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
    fac = std::min(5.0, std::max(0.2, fac));
    h *= fac;
    if (opt.max_step > 0)
      h = std::min(h, opt.max_step);
  }
  throw numerical_error("ODE step budget exhausted at r=" + std::to_string(r));
}

// Cubic Hermite evaluation on an accepted-node trajectory (r ascending).
class OdeProfile {
public:
  OdeProfile() = default;
  explicit OdeProfile(std::vector<OdeNode> nodes) : nodes_(std::move(nodes)) {}

  double r_min() const { return nodes_.front().r; }
  double r_max() const { return nodes_.back().r; }
  const std::vector<OdeNode> &nodes() const { return nodes_; }

  double u(double r) const { return eval(r).first; }
  double du(double r) const { return eval(r).second; }

private:
  std::pair<double, double> eval(double r) const {
    const auto &n = nodes_;
    if (r <= n.front().r)
      return {n.front().u, n.front().du};
    if (r >= n.back().r)
      return {n.back().u, n.back().du};
    std::size_t lo = 0, hi = n.size() - 1;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      (n[mid].r <= r ? lo : hi) = mid;
    }
    const double h = n[hi].r - n[lo].r;
    const double t = (r - n[lo].r) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    const double u = h00 * n[lo].u + h10 * h * n[lo].du + h01 * n[hi].u +
                     h11 * h * n[hi].du;
    const double g00 = (6 * t2 - 6 * t) / h, g10 = 3 * t2 - 4 * t + 1;
    const double g01 = (6 * t - 6 * t2) / h, g11 = 3 * t2 - 2 * t;
    const double du =
        g00 * n[lo].u + g10 * n[lo].du + g01 * n[hi].u + g11 * n[hi].du;
    return {u, du};
  }

  std::vector<OdeNode> nodes_;
};

} // namespace bosegas
