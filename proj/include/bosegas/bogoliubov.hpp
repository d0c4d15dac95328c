#pragma once

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

#include "bosegas/common.hpp"
#include "bosegas/lattice.hpp"
#include "bosegas/parallel.hpp"
#include "bosegas/potential.hpp"
#include "bosegas/quadrature.hpp"
#include "bosegas/scattering.hpp"

namespace bosegas {

// ---------------------------------------------------------------------------
// Dispersion and excitation spectrum
// ---------------------------------------------------------------------------

// sqrt(|p|^4 + 16 pi a0 p^2); exactly 0 at p = 0, phononic slope
// v_s = sqrt(16 pi a0) at small p.
inline double dispersion(double a0, double p_norm) {
  require(a0 >= 0.0, "dispersion: a0 must be >= 0");
  if (p_norm == 0.0)
    return 0.0;
  const double p2 = p_norm * p_norm;
  return p_norm * std::sqrt(p2 + 16.0 * pi * a0);
}

inline double sound_velocity(double a0) { return std::sqrt(16.0 * pi * a0); }

// finitely supported occupation numbers n_p on 2 pi Z^3 \ {0}, keyed by the
// integer lattice point
using OccupationList = std::map<std::array<int, 3>, long>;

inline double excitation_energy(double a0, const OccupationList &occ) {
  double total = 0.0;
  for (const auto &[n, count] : occ) {
    require(count >= 0, "excitation_energy: occupation numbers must be >= 0");
    require(n[0] != 0 || n[1] != 0 || n[2] != 0,
            "excitation_energy: p = 0 is not an excitation mode");
    const double p = two_pi * std::sqrt(static_cast<double>(n[0]) * n[0] +
                                        static_cast<double>(n[1]) * n[1] +
                                        static_cast<double>(n[2]) * n[2]);
    total += static_cast<double>(count) * dispersion(a0, p);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Ground state energy in the strong-scaling regime (unit box):
//   E_N = 4 pi (N-1) a0 + e_Lambda a0^2
//         - 1/2 sum_{p} [ p^2 + 8 pi a0 - sqrt(p^4 + 16 pi a0 p^2)
//                         - (8 pi a0)^2/(2 p^2) ]
// ---------------------------------------------------------------------------

struct GroundStateEnergy {
  double total = 0.0;
  double leading = 0.0;     // 4 pi (N-1) a0
  double finite_volume = 0.0; // e_Lambda a0^2
  double bogoliubov_sum = 0.0;
  double a0 = 0.0;
  double e_lambda = 0.0;
};

inline GroundStateEnergy ground_state_energy_gp(const RadialPotential &pot,
                                                long n_particles,
                                                int e_lambda_level = 120,
                                                int shell_level = 160) {
  require(n_particles >= 2, "ground_state_energy_gp: N must be >= 2");
  GroundStateEnergy out;
  out.a0 = solve_zero_energy(pot).a0;
  out.e_lambda = e_lambda(e_lambda_level).value;
  out.leading = 4.0 * pi * static_cast<double>(n_particles - 1) * out.a0;
  out.finite_volume = out.e_lambda * out.a0 * out.a0;
  out.bogoliubov_sum = bogoliubov_lattice_sum(out.a0, shell_level).value;
  out.total = out.leading + out.finite_volume + out.bogoliubov_sum;
  return out;
}

// ---------------------------------------------------------------------------
// Lee-Huang-Yang energy per particle and condensate depletion
// ---------------------------------------------------------------------------

struct LhyEnergy {
  double value = 0.0;
  bool dilute_warning = false; // rho a0^3 >= 1e-2
};

inline LhyEnergy lhy_energy_per_particle(double rho, double a0) {
  require(rho >= 0.0 && a0 >= 0.0, "lhy: rho and a0 must be >= 0");
  LhyEnergy out;
  const double x = rho * a0 * a0 * a0;
  out.dilute_warning = (x >= 1e-2);
  out.value = 4.0 * pi * rho * a0 * (1.0 + kLhyCoefficient * std::sqrt(x));
  return out;
}

inline constexpr double kDepletionCoefficient =
    8.0 / (3.0 * 1.7724538509055160273); // 8/(3 sqrt(pi))

// Thermodynamic-limit depletion with a constant kernel Vhat == 8 pi a0:
//   rho_+ = int d3p/(2pi)^3 [p^2 + c - sqrt(p^4 + 2cp^2)] / (2 sqrt(p^4 + 2cp^2)),
// c = 8 pi a0 rho.  Closed form: (8/(3 sqrt(pi))) sqrt(rho a0^3) rho.
inline double depletion_integral(double rho, double a0) {
  require(rho >= 0.0 && a0 >= 0.0, "depletion: rho and a0 must be >= 0");
  if (rho == 0.0 || a0 == 0.0)
    return 0.0;
  const double c = 8.0 * pi * a0 * rho;
  auto integrand = [c](double p) {
    if (p <= 0.0)
      return 0.0;
    const double p2 = p * p;
    const double disp = p * std::sqrt(p2 + 2.0 * c);
    return p2 * dispersion_deficit(p2, c) / (2.0 * disp);
  };
  const double sound = std::sqrt(2.0 * c);
  const double p_cut = std::max(60.0, 50.0 * sound);
  double integral = integrate(integrand, 0.0, sound, {1e-15, 1e-14, 48}) +
                    integrate(integrand, sound, p_cut, {1e-15, 1e-14, 48});
  // integrand -> c^2/(4 p^2) - c^3/(2 p^4) + ...; keep the first two tail terms
  integral += c * c / (4.0 * p_cut) - c * c * c / (6.0 * p_cut * p_cut * p_cut);
  return integral / (2.0 * pi * pi);
}

// Same integral with the momentum-dependent kernel rho Vhat(p).  Small
// negative transform lobes at large p are tolerated as long as the Bogoliubov
// dispersion stays real (p^2 + 2 rho Vhat(p) > 0).
inline double depletion_integral(double rho, const RadialPotential &pot) {
  require(rho >= 0.0, "depletion: rho must be >= 0");
  if (rho == 0.0)
    return 0.0;
  auto integrand = [&](double p) {
    if (p <= 0.0)
      return 0.0;
    const double c = rho * fourier_transform(pot, p);
    if (c == 0.0)
      return 0.0;
    const double p2 = p * p;
    if (p2 + 2.0 * c <= 0.0) {
      std::ostringstream os;
      os << "depletion: p^4 + 2 rho Vhat(p) p^2 <= 0 at p = " << p;
      throw numerical_error(os.str());
    }
    const double disp = p * std::sqrt(p2 + 2.0 * c);
    return p2 * dispersion_deficit(p2, c) / (2.0 * disp);
  };
  const double c0 = rho * fourier_transform(pot, 0.0);
  const double sound = std::sqrt(2.0 * c0);
  const double p_cut = std::max({60.0, 50.0 * sound, 40.0 / pot.range()});
  const double integral = integrate(integrand, 0.0, sound, {1e-14, 1e-13, 48}) +
                          integrate(integrand, sound, p_cut, {1e-14, 1e-13, 48});
  return integral / (2.0 * pi * pi); // kernel decay makes the tail negligible
}

// ---------------------------------------------------------------------------
// Quadratic-theory energy with the full momentum-dependent kernel, in the
// exact two-line arrangement
//   E = (N/2) rho Vhat(0) - 1/4 sum (rho Vhat(p))^2/p^2
//       - 1/2 sum [ p^2 + rho Vhat(p) - sqrt(p^4 + 2 rho Vhat(p) p^2)
//                   - 1/4 (rho Vhat(p))^2/p^2 ]
// over p in (2pi/L) Z^3 \ {0} (or the continuum integral).
// ---------------------------------------------------------------------------

struct MfEnergy {
  double total = 0.0;
  double line1 = 0.0;
  double line2 = 0.0;
  bool negative_vhat_warning = false;
};

inline MfEnergy bogoliubov_energy_mf(double rho, const RadialPotential &pot,
                                     double box_length, double p_cut,
                                     bool continuum = false) {
  require(rho > 0.0, "bogoliubov_energy_mf: rho must be > 0");
  require(box_length > 0.0 && p_cut > 0.0,
          "bogoliubov_energy_mf: box length and momentum cutoff must be > 0");
  MfEnergy out;
  const double n_particles = rho * box_length * box_length * box_length;
  const double vhat0 = fourier_transform(pot, 0.0);

  auto sum_term = [&](double p) { // (rho Vhat)^2 / p^2
    const double c = rho * fourier_transform(pot, p);
    return c * c / (p * p);
  };
  auto bracket = [&](double p) {
    const double p2 = p * p;
    const double c = rho * fourier_transform(pot, p);
    if (c < 0.0 && p2 + 2.0 * c < 0.0) {
      std::ostringstream os;
      os << "bogoliubov_energy_mf: p^4 + 2 rho Vhat(p) p^2 < 0 at p = " << p;
      throw numerical_error(os.str());
    }
    const double disp = std::sqrt(p2 * p2 + 2.0 * c * p2);
    return p2 + c - disp - 0.25 * c * c / p2;
  };

  double s1 = 0.0, s2 = 0.0;
  if (continuum) {
    const double vol = box_length * box_length * box_length;
    auto radial = [&](auto &&f) {
      return vol / (2.0 * pi * pi) *
             integrate([&](double p) { return p * p * f(p); }, 1e-9, p_cut,
                       {1e-13, 1e-12, 48});
    };
    s1 = radial(sum_term);
    s2 = radial(bracket);
  } else {
    const double spacing = two_pi / box_length;
    const auto s_max = static_cast<std::int64_t>((p_cut / spacing) * (p_cut / spacing));
    require(s_max >= 1, "bogoliubov_energy_mf: cutoff below the first shell");
    const auto r3 = three_squares_table(s_max);
    for (std::int64_t s = 1; s <= s_max; ++s) {
      if (!r3[static_cast<std::size_t>(s)])
        continue;
      const double p = spacing * std::sqrt(static_cast<double>(s));
      if (rho * fourier_transform(pot, p) < 0.0)
        out.negative_vhat_warning = true;
      s1 += r3[static_cast<std::size_t>(s)] * sum_term(p);
      s2 += r3[static_cast<std::size_t>(s)] * bracket(p);
    }
  }
  out.line1 = 0.5 * n_particles * rho * vhat0 - 0.25 * s1;
  out.line2 = -0.5 * s2;
  out.total = out.line1 + out.line2;
  return out;
}

// The dilute-limit substitution applied to the two-line formula: the first
// line collapses to 4 pi rho a0 N and the second line keeps a constant
// kernel 8 pi a0 with the convergent 1/2-weighted momentum subtraction.
// Reproduces lhy_energy_per_particle in the continuum.
inline double bogoliubov_energy_lhy_form(double rho, double a0) {
  require(rho > 0.0 && a0 >= 0.0, "bogoliubov_energy_lhy_form: bad arguments");
  const double c = 8.0 * pi * a0 * rho;
  auto bracket = [c](double p) {
    const double p2 = p * p;
    return dispersion_deficit(p2, c) - 0.5 * c * c / p2;
  };
  const double sound = std::sqrt(2.0 * c);
  const double p_cut = std::max(60.0, 60.0 * sound);
  double integral =
      integrate([&](double p) { return p * p * bracket(p); }, 1e-10, sound,
                {1e-15, 1e-14, 48}) +
      integrate([&](double p) { return p * p * bracket(p); }, sound, p_cut,
                {1e-15, 1e-14, 48});
  // tail: p^2 bracket -> -c^3/(2 p^2) + 5 c^4/(8 p^4)
  integral += -c * c * c / (2.0 * p_cut) +
              5.0 * c * c * c * c / (24.0 * p_cut * p_cut * p_cut);
  // per particle: 4 pi rho a0 - (1/(2 rho)) (2 pi^2)^{-1} integral
  return 4.0 * pi * rho * a0 - integral / (2.0 * rho * 2.0 * pi * pi);
}

// ---------------------------------------------------------------------------
// Renormalized coefficient pipeline
//   gamma_p = cosh(eta_H(p)), sigma_p = sinh(eta_H(p))
//   conv_p  = lattice convolution (Vhat(./N) * fhat_N)_p, evaluated as the
//             continuum transform of V(y) f_N(y/N) at p/N
//   F_p = p^2(gamma^2 + sigma^2) + conv_p (gamma + sigma)^2
//   G_p = 2 p^2 gamma sigma + conv_p (gamma + sigma)^2
//   tanh(2 tau_p) = -G_p/F_p
// ---------------------------------------------------------------------------

struct CoefficientRow {
  double p = 0.0;
  double eta = 0.0;
  double gamma = 1.0;
  double sigma = 0.0;
  double conv = 0.0;
  double F = 0.0;
  double G = 0.0;
  double tau = 0.0;
  double diag = 0.0; // sqrt(F^2 - G^2)
};

struct BogoliubovCoefficients {
  long n_particles = 0;
  double mu = 0.0;
  double a0 = 0.0;
  double lambda = 0.0; // Neumann eigenvalue carried for reference
  std::vector<CoefficientRow> rows;
};

// (Vhat(./N) * fhat_N)_p = 4 pi int_0^R y^2 V(y) f_N(y/N) sinc(|p| y / N) dy.
// V f_N is supported well inside the box, so box and continuum transforms
// agree up to boundary terms that vanish with the support.
inline double interaction_f_transform(const RadialPotential &pot,
                                      const NeumannSolution &sol, double p_norm) {
  const double n = static_cast<double>(sol.n_particles);
  auto ig = [&](double y) {
    return y * y * pot(y) * sol.f(y / n) * sinc(p_norm * y / n);
  };
  return 4.0 * pi * integrate(ig, 0.0, pot.range(), {1e-13, 1e-12, 48});
}

inline BogoliubovCoefficients
renormalized_coefficients(const RadialPotential &pot, long n_particles, double mu,
                          const std::vector<double> &p_norms) {
  require(mu > 0.0, "renormalized_coefficients: mu must be > 0");
  BogoliubovCoefficients out;
  out.n_particles = n_particles;
  out.mu = mu;
  const auto neumann = solve_neumann(pot, n_particles);
  out.lambda = neumann.lambda;
  out.a0 = solve_zero_energy(pot).a0;
  out.rows.resize(p_norms.size());
  parallel_for(p_norms.size(), [&](std::size_t i) {
    CoefficientRow row;
    row.p = p_norms[i];
    require(row.p > 0.0, "renormalized_coefficients: p must be nonzero");
    row.eta = (row.p >= mu) ? eta_kernel(neumann, row.p) : 0.0;
    row.gamma = std::cosh(row.eta);
    row.sigma = std::sinh(row.eta);
    row.conv = interaction_f_transform(pot, neumann, row.p);
    const double p2 = row.p * row.p;
    const double plus2 = (row.gamma + row.sigma) * (row.gamma + row.sigma);
    row.F = p2 * (row.gamma * row.gamma + row.sigma * row.sigma) + row.conv * plus2;
    row.G = 2.0 * p2 * row.gamma * row.sigma + row.conv * plus2;
    out.rows[i] = row;
  });
  for (auto &row : out.rows) {
    if (!(row.F > 0.0) || std::abs(row.G) >= row.F) {
      std::ostringstream os;
      os << "renormalized_coefficients: |G_p| >= F_p at p = " << row.p
         << " (F = " << row.F << ", G = " << row.G
         << "); mu or N too small for the expansion";
      throw numerical_error(os.str());
    }
    double x = -row.G / row.F;
    const double cap = 1.0 - 1e-14;
    x = std::max(-cap, std::min(cap, x));
    row.tau = 0.5 * std::atanh(x);
    row.diag = std::sqrt((row.F - row.G) * (row.F + row.G));
  }
  return out;
}

// Constant term of the pairwise quadratic diagonalization, two routes that
// must agree: directly via sqrt(F^2 - G^2), and through the tau rotation.
inline double diagonalization_constant_direct(const BogoliubovCoefficients &c) {
  double total = 0.0;
  for (const auto &row : c.rows)
    total += 0.5 * (row.diag - row.F);
  return total;
}

inline double diagonalization_constant_via_tau(const BogoliubovCoefficients &c) {
  double total = 0.0;
  for (const auto &row : c.rows) {
    const double sh = std::sinh(row.tau), ch = std::cosh(row.tau);
    total += row.F * sh * sh + row.G * sh * ch;
  }
  return total;
}

} // namespace bosegas
