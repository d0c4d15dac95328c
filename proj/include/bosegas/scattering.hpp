#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "bosegas/common.hpp"
#include "bosegas/ode.hpp"
#include "bosegas/potential.hpp"
#include "bosegas/quadrature.hpp"

namespace bosegas {

// ---------------------------------------------------------------------------
// Zero-energy scattering: (-Lap + V/2) f = 0, f -> 1 at infinity.
// Radial reduction u = r f obeys u'' = (V/2) u with u(0) = 0; outside the
// support u = a (r - a0) exactly, which fixes the scattering length a0.
// ---------------------------------------------------------------------------

struct ScatteringSolution {
  double a0 = 0.0;
  double residual = 0.0;        // |a0(tol) - a0(tol/16)| re-integration defect
  double slope = 1.0;           // u'(R): u = slope*(r - a0) outside the support
  double support = 0.0;         // R of the potential solved
  OdeProfile profile;           // (r, u, u') nodes on [r_start, R]

  // f(r) = u(r)/(slope * r), continued by 1 - a0/r outside the support
  double f(double r) const {
    if (r <= 0.0)
      return f0_;
    if (r >= support)
      return 1.0 - a0 / r;
    if (r < profile.r_min())
      return f0_; // series start region: f is flat to O(r^2)
    return profile.u(r) / (slope * r);
  }

  double f0_ = 1.0; // f(0), from the innermost node
};

namespace detail {

inline double shoot_a0(const RadialFn &v, double rel_tol, double &slope,
                       OdeProfile *profile_out) {
  const double R = v.range;
  const double r_start = 1e-8 * std::max(R, 1.0);
  auto g = [&v](double r) { return 0.5 * v(r); };
  auto nodes = integrate_radial(g, r_start, R, r_start, 1.0,
                                {rel_tol, 1e-14 * R, 0.0});
  const auto &last = nodes.back();
  slope = last.du;
  if (slope <= 0.0)
    throw numerical_error("zero-energy shooting: non-positive exterior slope "
                          "(potential too strong to be repulsive-regular?)");
  const double a0 = R - last.u / last.du;
  if (profile_out)
    *profile_out = OdeProfile(std::move(nodes));
  return a0;
}

} // namespace detail

inline ScatteringSolution solve_zero_energy(const RadialFn &v) {
  ScatteringSolution sol;
  sol.support = v.range;

  // trivial potential: f == 1 everywhere
  bool vanishes = true;
  for (int i = 0; i <= 128 && vanishes; ++i)
    vanishes = (v(v.range * i / 128.0) == 0.0);
  if (vanishes) {
    sol.a0 = 0.0;
    sol.residual = 0.0;
    sol.slope = 1.0;
    sol.profile = OdeProfile({{0.0, 0.0, 1.0}, {v.range, v.range, 1.0}});
    sol.f0_ = 1.0;
    return sol;
  }

  double slope = 1.0;
  const double a0 = detail::shoot_a0(v, 1e-10, slope, &sol.profile);
  double slope_chk = 1.0;
  const double a0_chk = detail::shoot_a0(v, 1e-10 / 16.0, slope_chk, nullptr);
  sol.a0 = a0_chk;
  sol.slope = slope_chk;
  sol.residual = std::abs(a0 - a0_chk);
  if (sol.a0 < -1e-10)
    throw std::logic_error("solve_zero_energy: negative scattering length for "
                           "V >= 0 signals a solver bug");
  sol.a0 = std::max(sol.a0, 0.0);
  sol.f0_ = sol.profile.nodes().front().u /
            (sol.slope * sol.profile.nodes().front().r);
  if (sol.residual > 1e-9)
    throw numerical_error("solve_zero_energy: residual above 1e-9");
  return sol;
}

inline ScatteringSolution solve_zero_energy(const RadialPotential &pot) {
  return solve_zero_energy(as_radial_fn(pot));
}

inline ScatteringSolution solve_zero_energy(const ScaledPotential &pot) {
  return solve_zero_energy(pot.as_radial_fn());
}

// (8 pi)^{-1} int V f, evaluated with the solved profile; equals a0 up to
// quadrature error and is used as the self-consistency check.
inline double scattering_length_integral(const RadialFn &v,
                                         const ScatteringSolution &sol) {
  auto ig = [&](double r) { return r * r * v(r) * sol.f(r); };
  return 0.5 * integrate(ig, 0.0, v.range); // (8pi)^{-1} * 4pi = 1/2
}

inline double scattering_length_integral(const RadialPotential &pot,
                                         const ScatteringSolution &sol) {
  return scattering_length_integral(as_radial_fn(pot), sol);
}

// ---------------------------------------------------------------------------
// Born approximations of the infinite-volume scattering length:
//   8 pi a0^(0) = V^(0)
//   8 pi a0^(1) = -int d3p/(2pi)^3 V^(p)^2/(2 p^2)
//               = -(1/(4 pi^2)) int_0^inf V^(p)^2 dp
// The common (8 pi)^{-1} makes a0^(0) + a0^(1) the second-order expansion of
// the scattering length itself (closed-form square-well check: -V0^2 R^5/30).
// ---------------------------------------------------------------------------

inline std::vector<double> born_series(const RadialPotential &pot, int order) {
  require(order == 0 || order == 1, "born_series: order must be 0 or 1");
  std::vector<double> out;
  out.push_back(fourier_transform(pot, 0.0) / (8.0 * pi));
  if (order == 0)
    return out;
  const double R = pot.range();
  auto vhat2 = [&](double p) {
    const double v = fourier_transform(pot, p);
    return v * v;
  };
  // head by adaptive quadrature, oscillatory tail in half-period blocks
  const double p_break = 40.0 / R;
  double integral = integrate(vhat2, 0.0, p_break, {1e-15, 1e-13, 48});
  integral += integrate_to_infinity(vhat2, p_break, pi / R, 1e-15);
  out.push_back(-integral / (4.0 * pi * pi) / (8.0 * pi));
  return out;
}

// ---------------------------------------------------------------------------
// Neumann problem on the ball |x| <= 1/2:
//   (-Lap + N^2 V(N x)/2) f_N = lambda_N f_N,  f_N(1/2) = 1, d_r f_N(1/2) = 0.
// Radial shooting on u = r f_N: u'' = (N^2 V(N r)/2 - lambda) u, u(0) = 0,
// Neumann condition u'(1/2) = 2 u(1/2).
// ---------------------------------------------------------------------------

class NeumannSolution {
public:
  long n_particles = 0;
  double lambda = 0.0;           // lowest eigenvalue lambda_N
  double boundary_defect = 0.0;  // |f'(1/2)| after normalization
  double mu = 0.0;               // high-momentum cutoff carried for eta_H

  // f_N(r) on [0, 1/2], normalized to f_N(1/2) = 1
  double f(double r) const {
    if (r <= 0.0)
      return f0_;
    if (r >= 0.5)
      return 1.0;
    if (r < profile_.r_min())
      return f0_;
    return profile_.u(r) / (norm_ * r);
  }

  // w_N = 1 - f_N, supported in the ball
  double w(double r) const { return (r >= 0.5) ? 0.0 : 1.0 - f(r); }

  const OdeProfile &profile() const { return profile_; }
  double normalization() const { return norm_; }

  // internals set by solve_neumann
  OdeProfile profile_;
  double norm_ = 1.0;
  double f0_ = 1.0;
};

namespace detail {

struct NeumannShot {
  double mismatch; // u'(1/2) - 2 u(1/2), shot from u ~ r at the origin
  std::vector<OdeNode> nodes;
};

template <class W>
inline NeumannShot neumann_shoot(const W &w_half_v, double lambda,
                                 double support, bool keep_nodes) {
  auto g = [&](double r) { return w_half_v(r) - lambda; };
  const double r_start = 1e-8;
  // resolve the (narrow, tall) potential region with a capped first stage
  OdeOptions inner{1e-11, 1e-16, support / 16.0};
  auto nodes = integrate_radial(g, r_start, std::min(0.5, support), r_start, 1.0, inner);
  if (support < 0.5) {
    auto rest = integrate_radial(g, nodes.back().r, 0.5, nodes.back().u,
                                 nodes.back().du, {1e-12, 1e-16, 0.0});
    nodes.insert(nodes.end(), rest.begin() + 1, rest.end());
  }
  NeumannShot shot;
  shot.mismatch = nodes.back().du - 2.0 * nodes.back().u;
  if (keep_nodes)
    shot.nodes = std::move(nodes);
  return shot;
}

} // namespace detail

inline NeumannSolution solve_neumann(const RadialPotential &pot, long n_particles) {
  require(n_particles >= 1, "solve_neumann: N must be >= 1");
  const double support = pot.range() / static_cast<double>(n_particles);
  require(support < 0.5,
          "solve_neumann: requires R/N < 1/2 (support inside the ball)");

  const double n2 = static_cast<double>(n_particles) * static_cast<double>(n_particles);
  auto w_half_v = [&](double r) {
    return 0.5 * n2 * pot(static_cast<double>(n_particles) * r);
  };

  NeumannSolution sol;
  sol.n_particles = n_particles;

  auto mismatch = [&](double lambda) {
    return detail::neumann_shoot(w_half_v, lambda, support, false).mismatch;
  };

  // V = 0 (or numerically vanishing): lambda = 0, f == 1
  const double lambda_top = 4.0 * pi * pi;
  const double g0 = mismatch(0.0);
  if (g0 <= 1e-11) {
    if (g0 < -1e-10)
      throw numerical_error("solve_neumann: negative mismatch at lambda=0 for "
                            "a nonnegative potential");
    sol.lambda = 0.0;
    auto shot = detail::neumann_shoot(w_half_v, 0.0, support, true);
    sol.profile_ = OdeProfile(std::move(shot.nodes));
    sol.norm_ = 2.0 * sol.profile_.u(0.5);
    sol.f0_ = 1.0;
    sol.boundary_defect = std::abs(g0);
    return sol;
  }

  // first sign change on a coarse scan, then bisection to 1e-12
  double lo = 0.0, hi = -1.0;
  const int scan = 64;
  double prev = g0;
  for (int i = 1; i <= scan; ++i) {
    const double lam = lambda_top * i / scan;
    const double g = mismatch(lam);
    if (prev > 0.0 && g <= 0.0) {
      lo = lambda_top * (i - 1) / scan;
      hi = lam;
      break;
    }
    prev = g;
  }
  if (hi < 0.0)
    throw numerical_error("solve_neumann: no eigenvalue bracket found in "
                          "(0, (2 pi)^2) - bracket exhaustion");
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (mismatch(mid) > 0.0 ? lo : hi) = mid;
  }
  sol.lambda = 0.5 * (lo + hi);

  auto shot = detail::neumann_shoot(w_half_v, sol.lambda, support, true);
  sol.profile_ = OdeProfile(std::move(shot.nodes));
  // normalize so that f_N(1/2) = 1, i.e. u(1/2) = 1/2
  sol.norm_ = 2.0 * sol.profile_.u(0.5);
  if (sol.norm_ <= 0.0)
    throw numerical_error("solve_neumann: non-positive boundary value");
  const auto &first = sol.profile_.nodes().front();
  sol.f0_ = first.u / (sol.norm_ * first.r);
  // f'(1/2) = (u'(1/2) - f(1/2))/r at r = 1/2
  sol.boundary_defect =
      std::abs(sol.profile_.du(0.5) / sol.norm_ - 1.0) / 0.5;
  return sol;
}

// int N^3 V(N x) f_N(x) d3x = 4 pi int_0^R y^2 V(y) f_N(y/N) dy; converges to
// 8 pi a0 with an O(1/N) defect.
inline double interaction_f_integral(const RadialPotential &pot,
                                     const NeumannSolution &sol) {
  const double n = static_cast<double>(sol.n_particles);
  auto ig = [&](double y) { return y * y * pot(y) * sol.f(y / n); };
  return 4.0 * pi * integrate(ig, 0.0, pot.range());
}

// ---------------------------------------------------------------------------
// Correlation kernel eta_p.
//
// eta_p is the Fourier transform of the rescaled w_N = 1 - f_N: reading the
// transform in the microscopic variable y = N x,
//    eta_p = pref * N^{-2} * w_N^micro(p/N) = pref * N * w_N^box(p),
// with w^box the transform of w_N as a function on the ball |x| <= 1/2.
// The prefactor (sign and N-power, conventions differ across the literature)
// is isolated here:
// ---------------------------------------------------------------------------

// sign * N^eta_power multiplying the box-variable transform of w_N.
inline constexpr double kEtaSign = -1.0;
inline constexpr double kEtaPower = 1.0;

inline double eta_kernel(const NeumannSolution &sol, double p_norm) {
  const double n = static_cast<double>(sol.n_particles);
  RadialFn w{[&sol](double r) { return sol.w(r); }, 0.5};
  const double what = radial_fourier(w, p_norm);
  return kEtaSign * std::pow(n, kEtaPower) * what;
}

// eta_H(p) = eta_p * 1(|p| >= mu) on a list of momentum magnitudes.
inline std::map<double, double> eta_highpass(const NeumannSolution &sol, double mu,
                                             const std::vector<double> &p_norms) {
  require(mu > 0.0, "eta_highpass: mu must be > 0");
  std::map<double, double> out;
  for (double p : p_norms)
    out[p] = (p >= mu) ? eta_kernel(sol, p) : 0.0;
  return out;
}

} // namespace bosegas
