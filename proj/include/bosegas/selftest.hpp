#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "bosegas/bogoliubov.hpp"
#include "bosegas/fockspace.hpp"
#include "bosegas/lattice.hpp"
#include "bosegas/potential.hpp"
#include "bosegas/scattering.hpp"
#include "bosegas/simulate.hpp"

namespace bosegas::selftest {

struct CheckResult {
  int id = 0;
  std::string name;
  bool passed = false;
  double seconds = 0.0;
  std::string detail;
};

namespace detail {

inline RadialPotential reference_well() { return RadialPotential::square_well(2.0, 1.0); }

template <class F>
CheckResult timed(int id, const std::string &name, const F &body) {
  CheckResult res;
  res.id = id;
  res.name = name;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    std::ostringstream detail;
    res.passed = body(detail);
    res.detail = detail.str();
  } catch (const std::exception &e) {
    res.passed = false;
    res.detail = std::string("exception: ") + e.what();
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

} // namespace detail

// 1. square well (V0=2, R=1): a0 = 1 - tanh(1) to 1e-8 relative
inline CheckResult check_scattering_closed_form() {
  return detail::timed(1, "scattering closed form", [](std::ostringstream &out) {
    const auto sol = solve_zero_energy(detail::reference_well());
    const double exact = 1.0 - std::tanh(1.0);
    const double rel = std::abs(sol.a0 - exact) / exact;
    out << "a0=" << sol.a0 << " exact=" << exact << " rel=" << rel;
    return rel < 1e-8;
  });
}

// 2. (8 pi)^{-1} int V f = a0 within 1e-8 for 5 potentials
inline CheckResult check_scattering_identity() {
  return detail::timed(2, "scattering-length identity", [](std::ostringstream &out) {
    std::vector<RadialPotential> pots = {
        RadialPotential::square_well(2.0, 1.0),
        RadialPotential::square_well(0.5, 1.5),
        RadialPotential::square_well(8.0, 0.5),
        RadialPotential::smooth_bump(3.0, 1.0),
    };
    {
      std::vector<std::pair<double, double>> samples;
      for (int i = 0; i <= 60; ++i) {
        const double r = 1.2 * i / 60.0;
        samples.emplace_back(r, 1.5 * (1.0 - (r / 1.2) * (r / 1.2)));
      }
      samples.back().second = 0.0;
      pots.push_back(RadialPotential::tabulated(samples));
    }
    double worst = 0.0;
    for (const auto &p : pots) {
      const auto sol = solve_zero_energy(p);
      const double integral = scattering_length_integral(p, sol);
      worst = std::max(worst, std::abs(integral - sol.a0));
    }
    out << "max |(8pi)^-1 int V f - a0| = " << worst;
    return worst < 1e-8;
  });
}

// 3. Born convergence: error ratio in [6, 10] under kappa -> kappa/2
inline CheckResult check_born_convergence() {
  return detail::timed(3, "Born convergence", [](std::ostringstream &out) {
    std::vector<double> errs;
    for (double kappa : {0.1, 0.05, 0.025}) {
      const auto pot = RadialPotential::square_well(2.0 * kappa, 1.0);
      const auto born = born_series(pot, 1);
      const auto sol = solve_zero_energy(pot);
      errs.push_back(std::abs(born[0] + born[1] - sol.a0));
    }
    const double r1 = errs[0] / errs[1];
    const double r2 = errs[1] / errs[2];
    out << "ratios " << r1 << ", " << r2 << " (theoretical 8)";
    return r1 >= 6.0 && r1 <= 10.0 && r2 >= 6.0 && r2 <= 10.0;
  });
}

// 4. sum vs integral ratio within 2% of 1 at R = 1e4
inline CheckResult check_lhy_continuum() {
  return detail::timed(4, "LHY continuum recovery", [](std::ostringstream &out) {
    const double a0 = 0.1;
    double prev_gap = 1e300;
    bool monotone = true;
    double final_gap = 0.0;
    for (double r : {100.0, 1000.0, 10000.0}) {
      const auto svi = sum_vs_integral_check(a0, r);
      const double gap = std::abs(svi.ratio - 1.0);
      if (gap > prev_gap)
        monotone = false;
      prev_gap = gap;
      final_gap = gap;
      out << "R=" << r << " ratio=" << svi.ratio << "  ";
    }
    return monotone && final_gap < 0.02;
  });
}

// 5. depletion quadrature vs closed form at (rho, a) = (1, 0.01) to 1e-6
inline CheckResult check_depletion() {
  return detail::timed(5, "condensate depletion", [](std::ostringstream &out) {
    const double quad = depletion_integral(1.0, 0.01);
    const double closed = kDepletionCoefficient * std::sqrt(1e-6) * 1.0;
    const double rel = std::abs(quad - closed) / closed;
    out << "quad=" << quad << " closed=" << closed << " rel=" << rel;
    return rel < 1e-6;
  });
}

// 6. e_Lambda stability across truncations and accelerations
inline CheckResult check_e_lambda_stability() {
  return detail::timed(6, "e_Lambda stability", [](std::ostringstream &out) {
    const auto e60 = e_lambda(60, "averaged");
    const auto e120 = e_lambda(120, "averaged");
    const auto abel = e_lambda_abel();
    const double gap = std::abs(e60.value - e120.value);
    const double budget = e60.error_estimate + e120.error_estimate;
    const double method_gap = std::abs(e120.value - abel.value);
    out << "e(60)=" << e60.value << " e(120)=" << e120.value
        << " abel=" << abel.value << "  |e60-e120|=" << gap << " budget=" << budget
        << "  |e120-abel|=" << method_gap;
    return gap <= budget && method_gap <= 1e-3;
  });
}

// 7. finite-volume Born vs e_Lambda at N = 1e4
inline CheckResult check_finite_volume_born() {
  return detail::timed(7, "finite-volume Born vs e_Lambda", [](std::ostringstream &out) {
    const auto pot = RadialPotential::square_well(0.02, 1.0); // weak well
    const long n = 10000;
    const auto fv = finite_volume_scattering_length(pot, n, 1, 60);
    const double lhs = 4.0 * pi * static_cast<double>(n - 1) * (fv.a0 - fv.a_lattice);
    const double rhs = e_lambda(120).value * fv.a0 * fv.a0;
    const double rel = std::abs(lhs / rhs - 1.0);
    out << "4pi(N-1)(a0-aL)=" << lhs << " e_L a0^2=" << rhs << " rel=" << rel;
    return rel < 0.10;
  });
}

// 8. sqrt(F^2-G^2) approaches the dispersion monotonically in N at p = 2 pi
inline CheckResult check_coefficient_pipeline() {
  return detail::timed(8, "renormalized coefficient pipeline", [](std::ostringstream &out) {
    const auto pot = detail::reference_well();
    const double a0 = solve_zero_energy(pot).a0;
    const double target = dispersion(a0, two_pi);
    double prev = 1e300;
    bool monotone = true;
    for (long n : {1000L, 2000L, 4000L}) {
      const auto co = renormalized_coefficients(pot, n, pi, {two_pi});
      const double rel = std::abs(co.rows[0].diag - target) / target;
      out << "N=" << n << " rel=" << rel << "  ";
      if (rel >= prev)
        monotone = false;
      prev = rel;
    }
    return monotone;
  });
}

// 9. exact operator identities on (N=4, 7 modes)
inline CheckResult check_operator_identities() {
  return detail::timed(9, "exact operator identities", [](std::ostringstream &out) {
    using namespace fock;
    const auto pot = detail::reference_well();
    const long n = 4;
    const auto modes = ModeSet::ball(two_pi * 1.01);
    const auto bp = FockBasis::particle(modes, n);
    const auto be = FockBasis::excitation(modes, n);
    const SpMat u = excitation_map(bp, be);

    double worst_rule = 0.0;
    const SpMat nplus = number_excited(be);
    { // U a*_0 a_0 U* = N - N_+
      const SpMat lhs = conjugate(pair_op(bp, 0, 0), SpMat(u.transpose()));
      SpMat rhs = diagonal_op(be, [&](int i) { return static_cast<double>(n) - be.sector(i); });
      worst_rule = std::max(worst_rule, max_abs(SpMat(lhs - rhs)));
    }
    const SpMat sqrt_nminus = diagonal_op(be, [&](int i) {
      return std::sqrt(static_cast<double>(n) - be.sector(i));
    });
    for (int p = 1; p < modes.size(); ++p) {
      { // U a*_p a_0 U* = a*_p sqrt(N - N_+)
        const SpMat lhs = conjugate(pair_op(bp, p, 0), SpMat(u.transpose()));
        const SpMat rhs = SpMat(a_create(be, p) * sqrt_nminus);
        worst_rule = std::max(worst_rule, max_abs(SpMat(lhs - rhs)));
      }
      { // U a*_0 a_p U* = sqrt(N - N_+) a_p
        const SpMat lhs = conjugate(pair_op(bp, 0, p), SpMat(u.transpose()));
        const SpMat rhs = SpMat(sqrt_nminus * a_annihilate(be, p));
        worst_rule = std::max(worst_rule, max_abs(SpMat(lhs - rhs)));
      }
      for (int q = 1; q < modes.size(); ++q) { // U a*_p a_q U* = a*_p a_q
        const SpMat lhs = conjugate(pair_op(bp, p, q), SpMat(u.transpose()));
        const SpMat rhs = SpMat(a_create(be, p) * a_annihilate(be, q));
        worst_rule = std::max(worst_rule, max_abs(SpMat(lhs - rhs)));
      }
    }

    const double u_defect = unitarity_defect(u);
    const auto neumann = solve_neumann(pot, n);
    const auto eta = eta_on_modes(modes, [&](double p) { return eta_kernel(neumann, p); });
    const auto t_eta = build_generalized_bogoliubov(eta, be);
    const double t_defect = unitarity_defect(t_eta.matrix());

    // nontrivial cubic generator needs a second shell: N=3 on 19 modes
    const auto modes19 = ModeSet::ball(two_pi * std::sqrt(2.0) * 1.01);
    const auto be3 = FockBasis::excitation(modes19, 3);
    std::vector<Vec3i> p_high, p_low;
    for (int i = 1; i < modes19.size(); ++i)
      (modes19[i].norm2() == 2 ? p_high : p_low).push_back(modes19[i]);
    const auto eta19 = eta_on_modes(modes19, [&](double p) { return eta_kernel(neumann, p); });
    const auto cubic = build_cubic_generator(eta19, p_high, p_low,
                                             CubicWeights::plain, be3);
    const double a_defect = unitarity_defect(matrix_exponential(cubic.mat));

    const auto ham = build_hamiltonian(pot, n, 1.0, 1.0, bp);
    const double herm = ham.op.hermiticity_defect();
    const double momdef = momentum_defect(ham.op.mat, bp);

    out << "U-rules max=" << worst_rule << " unitarity(U,T,e^A)=(" << u_defect << ","
        << t_defect << "," << a_defect << ") herm=" << herm << " mom=" << momdef;
    return worst_rule < 1e-12 && u_defect <= 1e-10 && t_defect <= 1e-10 &&
           a_defect <= 1e-10 && herm < 1e-12 && momdef < 1e-12;
  });
}

// 10. eigenvalue lists invariant across every cascade stage on the N=4 space
inline CheckResult check_conjugation_invariance() {
  return detail::timed(10, "conjugation invariance", [](std::ostringstream &out) {
    fock::SimulateOptions opt;
    opt.n_particles = 4;
    opt.p_max = two_pi * 1.01;
    opt.mu = two_pi * 0.99;
    opt.nu = 0.0;
    opt.cascade = true;
    const auto rep = fock::run_simulation(detail::reference_well(), opt);
    double worst = 0.0;
    for (const auto &st : rep.stages) {
      if (!st.spectrum_drift) {
        out << st.name << ": no dense spectrum; ";
        return false;
      }
      worst = std::max(worst, *st.spectrum_drift);
      out << st.name << " drift=" << *st.spectrum_drift << "  ";
    }
    return worst < 1e-9;
  });
}

// 11. conjugation by T(eta_H) lowers the condensate expectation, N in {4,6,8}
inline CheckResult check_energy_lowering() {
  return detail::timed(11, "energy-lowering diagnostic", [](std::ostringstream &out) {
    using namespace fock;
    const auto pot = detail::reference_well();
    bool ok = true;
    for (long n : {4L, 6L, 8L}) {
      const auto modes = ModeSet::ball(two_pi * 1.01);
      const auto bp = FockBasis::particle(modes, n);
      const auto be = FockBasis::excitation(modes, n);
      const auto ham = build_hamiltonian(pot, n, 1.0, 1.0, bp);
      const SpMat u = excitation_map(bp, be);
      const SpMat l = conjugate(ham.op.mat, SpMat(u.transpose()));
      const auto neumann = solve_neumann(pot, n);
      const auto eta = eta_on_modes(modes, [&](double p) { return eta_kernel(neumann, p); });
      const auto t_eta = build_generalized_bogoliubov(eta, be);
      const Eigen::VectorXd omega = vacuum_vector(be);
      const Eigen::VectorXd w = t_eta.apply(omega);
      const double bare = omega.dot(l * omega);
      const double dressed = w.dot(l * w);
      out << "N=" << n << ": " << dressed << " < " << bare << "?  ";
      ok = ok && (dressed < bare);
    }
    return ok;
  });
}

// 12. small-system oracles: N=2 zero-momentum block (closed form) and the
// N=4 three-dimensional zero-momentum block, both with a constant kernel
inline CheckResult check_small_system_oracle() {
  return detail::timed(12, "small-system oracle", [](std::ostringstream &out) {
    using namespace fock;
    const double v = 0.37; // constant transfer weight kappa Vhat
    const double t = two_pi * two_pi;

    const auto modes = ModeSet::from_points({{0, 0, 0}, {1, 0, 0}, {-1, 0, 0}});
    bool ok = true;

    { // N=2: zero-momentum block spans {(2,0,0), (0,1,1)}; closed form
      const long n = 2;
      const auto bp = FockBasis::particle(modes, n);
      const auto ham = build_hamiltonian_with_kernel(
          [&](double) { return v / (2.0 * static_cast<double>(n)); }, bp);
      const double mean = 0.5 * (3.0 * v / 2.0 + 2.0 * t);
      const double disc = std::sqrt(std::pow(2.0 * t + v / 2.0, 2) + 2.0 * v * v);
      const double oracle = mean - 0.5 * disc;
      const auto gs = ground_state_lanczos(ham.op.mat, 1e-12, 80);
      out << "N=2: E=" << gs.value << " oracle=" << oracle
          << " diff=" << std::abs(gs.value - oracle) << "  ";
      ok = ok && std::abs(gs.value - oracle) < 1e-12 * std::max(1.0, std::abs(oracle));
    }

    { // N=4: 3-dimensional zero-momentum block {(4,0,0),(2,1,1),(0,2,2)}
      const long n = 4;
      const auto bp = FockBasis::particle(modes, n);
      const auto ham = build_hamiltonian_with_kernel(
          [&](double) { return v / (2.0 * static_cast<double>(n)); }, bp);
      Eigen::Matrix3d block;
      block << 1.5 * v, 0.5 * std::sqrt(3.0) * v, 0.0,                      //
          0.5 * std::sqrt(3.0) * v, 2.0 * t + 2.75 * v, 0.5 * std::sqrt(2.0) * v, //
          0.0, 0.5 * std::sqrt(2.0) * v, 4.0 * t + 2.5 * v;
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(block);
      const double oracle = es.eigenvalues()[0];
      const auto gs = ground_state_lanczos(ham.op.mat, 1e-12, 80);
      out << "N=4: E=" << gs.value << " oracle3x3=" << oracle
          << " diff=" << std::abs(gs.value - oracle);
      ok = ok && std::abs(gs.value - oracle) < 1e-12 * std::max(1.0, std::abs(oracle));
    }
    return ok;
  });
}

inline std::vector<CheckResult> run_all() {
  std::vector<CheckResult> results;
  const auto t0 = std::chrono::steady_clock::now();
  results.push_back(check_scattering_closed_form());
  results.push_back(check_scattering_identity());
  results.push_back(check_born_convergence());
  results.push_back(check_lhy_continuum());
  results.push_back(check_depletion());
  results.push_back(check_e_lambda_stability());
  results.push_back(check_finite_volume_born());
  results.push_back(check_coefficient_pipeline());
  results.push_back(check_operator_identities());
  results.push_back(check_conjugation_invariance());
  results.push_back(check_energy_lowering());
  results.push_back(check_small_system_oracle());
  // 13. whole-suite wall clock
  const double total =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CheckResult timing;
  timing.id = 13;
  timing.name = "suite wall time";
  timing.seconds = total;
  timing.passed = total < 600.0;
  std::ostringstream os;
  os << total << " s (budget 600 s)";
  timing.detail = os.str();
  results.push_back(timing);
  return results;
}

} // namespace bosegas::selftest
