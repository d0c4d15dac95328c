#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "bosegas/common.hpp"
#include "bosegas/quadrature.hpp"

namespace bosegas {

enum class PotentialKind { square_well, smooth_bump, tabulated };

inline std::string to_string(PotentialKind k) {
  switch (k) {
  case PotentialKind::square_well: return "square_well";
  case PotentialKind::smooth_bump: return "smooth_bump";
  case PotentialKind::tabulated: return "tabulated";
  }
  return "?";
}

// A non-negative, radial, compactly supported two-body interaction V(r),
// V(r) = 0 for r > R.  All instances are immutable after construction.
// The L^3 integrability assumed by the theory is not enforced numerically;
// only finiteness of the sampled values and of the second moment is checked.
class RadialPotential {
public:
  static RadialPotential square_well(double v0, double range) {
    require(v0 >= 0.0, "square_well: V0 must be >= 0");
    require(range > 0.0, "square_well: R must be > 0");
    RadialPotential p;
    p.kind_ = PotentialKind::square_well;
    p.range_ = range;
    p.v0_ = v0;
    return p;
  }

  // V0 * exp(1 - R^2/(R^2 - r^2)) inside r < R; C-infinity with compact support.
  static RadialPotential smooth_bump(double v0, double range) {
    require(v0 >= 0.0, "smooth_bump: V0 must be >= 0");
    require(range > 0.0, "smooth_bump: R must be > 0");
    RadialPotential p;
    p.kind_ = PotentialKind::smooth_bump;
    p.range_ = range;
    p.v0_ = v0;
    return p;
  }

  // Piecewise-cubic interpolation of (r, V) samples, clamped to 0 beyond R.
  static RadialPotential tabulated(std::vector<std::pair<double, double>> samples) {
    require(samples.size() >= 2, "tabulated: need at least 2 samples");
    for (std::size_t i = 0; i < samples.size(); ++i) {
      require(samples[i].first >= 0.0, "tabulated: r must be >= 0");
      require(samples[i].second >= 0.0, "tabulated: V(r) must be >= 0");
      if (i > 0)
        require(samples[i].first > samples[i - 1].first,
                "tabulated: r samples must be strictly increasing");
    }
    RadialPotential p;
    p.kind_ = PotentialKind::tabulated;
    p.samples_ = std::move(samples);
    p.range_ = p.samples_.back().first;
    p.build_spline();
    // integrability check for the documented L1(r^2 dr) requirement
    const double m2 = p.second_moment();
    if (!std::isfinite(m2))
      throw numerical_error("tabulated potential: non-finite second moment");
    return p;
  }

  PotentialKind kind() const { return kind_; }
  double range() const { return range_; }
  double v0() const { return v0_; }
  const std::vector<std::pair<double, double>> &samples() const { return samples_; }

  double operator()(double r) const {
    if (r > range_ || r < 0.0)
      return 0.0;
    switch (kind_) {
    case PotentialKind::square_well:
      return v0_;
    case PotentialKind::smooth_bump: {
      const double x2 = (r / range_) * (r / range_);
      if (x2 >= 1.0)
        return 0.0;
      return v0_ * std::exp(1.0 - 1.0 / (1.0 - x2));
    }
    case PotentialKind::tabulated:
      return spline_eval(r);
    }
    return 0.0;
  }

  // integral r^2 V(r) dr over [0,R]
  double second_moment() const {
    return integrate([this](double r) { return r * r * (*this)(r); }, 0.0, range_);
  }

private:
  void build_spline() {
    // cubic Hermite with central-difference slopes, clamped endpoints
    const std::size_t n = samples_.size();
    slopes_.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (i == 0)
        slopes_[i] = (samples_[1].second - samples_[0].second) /
                     (samples_[1].first - samples_[0].first);
      else if (i == n - 1)
        slopes_[i] = (samples_[n - 1].second - samples_[n - 2].second) /
                     (samples_[n - 1].first - samples_[n - 2].first);
      else
        slopes_[i] = (samples_[i + 1].second - samples_[i - 1].second) /
                     (samples_[i + 1].first - samples_[i - 1].first);
    }
  }

  double spline_eval(double r) const {
    const auto &s = samples_;
    if (r <= s.front().first)
      return s.front().second;
    std::size_t lo = 0, hi = s.size() - 1;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      (s[mid].first <= r ? lo : hi) = mid;
    }
    const double h = s[hi].first - s[lo].first;
    const double t = (r - s[lo].first) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * s[lo].second + (t3 - 2 * t2 + t) * h * slopes_[lo] +
           (-2 * t3 + 3 * t2) * s[hi].second + (t3 - t2) * h * slopes_[hi];
  }

  PotentialKind kind_ = PotentialKind::square_well;
  double range_ = 1.0;
  double v0_ = 0.0;
  std::vector<std::pair<double, double>> samples_;
  std::vector<double> slopes_;
};

// V^(k) = 4 pi int_0^R r^2 V(r) sin(kr)/(kr) dr, k >= 0.
inline double fourier_transform(const RadialPotential &pot, double k) {
  require(k >= 0.0, "fourier_transform: k must be >= 0");
  if (pot.kind() == PotentialKind::square_well) {
    const double R = pot.range();
    // 4 pi V0 (sin kR - kR cos kR)/k^3
    const double x = k * R;
    return 4.0 * pi * pot.v0() * R * R * R * sin_minus_xcos_over_x3(x);
  }
  // oscillation-aware: split [0,R] at half-periods of sin(kr) when k is large
  const double R = pot.range();
  auto integrand = [&](double r) { return r * r * pot(r) * sinc(k * r); };
  if (k * R < 20.0)
    return 4.0 * pi * integrate(integrand, 0.0, R);
  double total = 0.0;
  const double step = pi / k;
  double a = 0.0;
  while (a < R) {
    const double b = std::min(R, a + step);
    total += integrate(integrand, a, b, {1e-14, 1e-13, 40});
    a = b;
  }
  return 4.0 * pi * total;
}

// Generic radial function with compact support, the common currency between
// the potential, scattering and kernel modules.
struct RadialFn {
  std::function<double(double)> f;
  double range = 0.0;
  double operator()(double r) const { return (r >= 0.0 && r <= range) ? f(r) : 0.0; }
};

inline RadialFn as_radial_fn(const RadialPotential &pot) {
  return {[pot](double r) { return pot(r); }, pot.range()};
}

// 4 pi int_0^range r^2 g(r) sinc(kr) dr for a generic radial function.
inline double radial_fourier(const RadialFn &g, double k,
                             QuadratureOptions opt = {1e-13, 1e-13, 48}) {
  auto integrand = [&](double r) { return r * r * g(r) * sinc(k * r); };
  if (k * g.range < 20.0)
    return 4.0 * pi * integrate(integrand, 0.0, g.range, opt);
  double total = 0.0;
  const double step = pi / k;
  double a = 0.0;
  while (a < g.range) {
    const double b = std::min(g.range, a + step);
    total += integrate(integrand, a, b, opt);
    a = b;
  }
  return 4.0 * pi * total;
}

// kappa * N^{3 beta - 1} V(N^beta r): the two-body interaction of the scaled
// Hamiltonian.  The 1/N factor is tracked separately from the N^{3 beta}
// scaling so that Fourier identities stay exact.
class ScaledPotential {
public:
  ScaledPotential(RadialPotential base, long n_particles, double beta, double kappa)
      : base_(std::move(base)), n_(n_particles), beta_(beta), kappa_(kappa) {
    require(n_ >= 1, "rescale: N must be >= 1");
    require(beta_ >= 0.0 && beta_ <= 1.0, "rescale: beta must lie in [0,1]");
    require(kappa_ > 0.0, "rescale: kappa must be > 0");
    nbeta_ = std::pow(static_cast<double>(n_), beta_);
  }

  const RadialPotential &base() const { return base_; }
  long n_particles() const { return n_; }
  double beta() const { return beta_; }
  double kappa() const { return kappa_; }

  double support() const { return base_.range() / nbeta_; }

  // full two-body potential kappa N^{3b-1} V(N^b r)
  double operator()(double r) const {
    return kappa_ / static_cast<double>(n_) * n3beta() * base_(nbeta_ * r);
  }

  // kappa N^{3b} V(N^b r), i.e. the full potential with the 1/N kept aside
  double without_inv_n(double r) const { return kappa_ * n3beta() * base_(nbeta_ * r); }

  // Fourier transform of kappa N^{3b} V(N^b .): identically kappa V^(k / N^b).
  double fourier_without_inv_n(double k) const {
    return kappa_ * fourier_transform(base_, k / nbeta_);
  }

  RadialFn as_radial_fn() const {
    const auto self = *this;
    return {[self](double r) { return self(r); }, support()};
  }

private:
  double n3beta() const { return nbeta_ * nbeta_ * nbeta_; }

  RadialPotential base_;
  long n_;
  double beta_;
  double kappa_;
  double nbeta_;
};

inline ScaledPotential rescale(const RadialPotential &pot, long n_particles,
                               double beta, double kappa) {
  return ScaledPotential(pot, n_particles, beta, kappa);
}

} // namespace bosegas
