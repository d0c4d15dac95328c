#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bosegas/bogoliubov.hpp"
#include "bosegas/fockspace.hpp"
#include "bosegas/scattering.hpp"

namespace bosegas::fock {

// Exact verification run on a truncated mode set: build the Hamiltonian,
// diagonalize, drive it through the unitary cascade U, T(eta_H), e^A, T(tau),
// and report per-stage vacuum expectations, spectrum drift and overlaps.

struct SimulateOptions {
  long n_particles = 4;
  double p_max = two_pi; // mode cutoff
  double beta = 1.0;
  double kappa = 1.0;
  double mu = 0.0; // eta high-pass; 0 = keep every nonzero mode
  double nu = 0.0; // low-momentum boundary for the cubic sets (0 = empty P_L)
  bool cascade = false;
  std::int64_t dim_cap = 200000;
  int dense_cap = 1400; // full-matrix stages only below this dimension
};

struct StageReport {
  std::string name;
  double vacuum_expectation = 0.0;
  // max |eigenvalue drift| vs the original spectrum; unset when the
  // dimension exceeds the dense cap
  std::optional<double> spectrum_drift;
};

struct SimulateReport {
  int dimension = 0;
  long dropped_terms = 0;
  long cubic_dropped_terms = 0;
  double a0 = 0.0;
  double e_exact = 0.0;
  double lanczos_residual = 0.0;
  double e_bogoliubov_prediction = 0.0;
  std::vector<StageReport> stages;
  double overlap_bare = 0.0;    // |<psi, U* Omega>|^2
  double overlap_pair = 0.0;    // |<psi, U* T(eta_H) Omega>|^2
  double overlap_dressed = 0.0; // |<psi, U* T(eta_H) e^{A~} T(tau) Omega>|^2
};

inline SimulateReport run_simulation(const RadialPotential &pot,
                                     const SimulateOptions &opt) {
  require(opt.n_particles >= 2, "simulate: N must be >= 2");
  if (opt.mu != 0.0 && opt.nu != 0.0)
    require(opt.mu > opt.nu && opt.nu > 0.0, "simulate: need mu > nu > 0");

  SimulateReport rep;
  const ModeSet modes = ModeSet::ball(opt.p_max);
  require(modes.size() >= 2, "simulate: p_max keeps no excitation modes");
  const FockBasis basis_p = FockBasis::particle(modes, opt.n_particles, opt.dim_cap);
  const FockBasis basis_e = FockBasis::excitation(modes, opt.n_particles, opt.dim_cap);
  rep.dimension = basis_p.dim();

  const auto ham = build_hamiltonian(pot, opt.n_particles, opt.beta, opt.kappa, basis_p);
  rep.dropped_terms = ham.dropped_terms;

  const auto gs = ground_state_lanczos(ham.op.mat);
  rep.e_exact = gs.value;
  rep.lanczos_residual = gs.residual;

  rep.a0 = solve_zero_energy(pot).a0;
  {
    const auto pred = ground_state_energy_gp(pot, opt.n_particles);
    rep.e_bogoliubov_prediction = pred.total;
  }

  const bool dense_ok = basis_p.dim() <= opt.dense_cap;
  std::optional<Eigen::VectorXd> base_spectrum;
  if (dense_ok)
    base_spectrum = symmetric_spectrum(Eigen::MatrixXd(ham.op.mat));

  auto drift_of = [&](const Eigen::MatrixXd &h) -> std::optional<double> {
    if (!base_spectrum)
      return std::nullopt;
    const Eigen::VectorXd s = symmetric_spectrum(h);
    return (s - *base_spectrum).cwiseAbs().maxCoeff();
  };

  // stage 1: excitation map
  const SpMat u = excitation_map(basis_p, basis_e);
  const SpMat l_exc = conjugate(ham.op.mat, SpMat(u.transpose()));
  const Eigen::VectorXd omega = vacuum_vector(basis_e);
  rep.stages.push_back({"U", omega.dot(l_exc * omega),
                        dense_ok ? drift_of(Eigen::MatrixXd(l_exc)) : std::nullopt});

  // eta from the Neumann problem, high-passed at mu
  const auto neumann = solve_neumann(pot, opt.n_particles);
  std::vector<double> eta_h = eta_on_modes(modes, [&](double p) {
    return (p >= opt.mu) ? eta_kernel(neumann, p) : 0.0;
  });

  const auto t_eta = build_generalized_bogoliubov(eta_h, basis_e);
  Eigen::VectorXd chain = t_eta.apply(omega); // T(eta) Omega
  rep.stages.push_back({"T(eta)", chain.dot(l_exc * chain), std::nullopt});
  std::optional<Eigen::MatrixXd> g_dense;
  if (dense_ok) {
    g_dense = conjugate(l_exc, t_eta.matrix());
    rep.stages.back().spectrum_drift = drift_of(*g_dense);
  }

  if (opt.cascade) {
    // cubic sets: P_H = {|p| >= mu}, P_L = {0 < |p| <= nu}
    std::vector<Vec3i> p_high, p_low;
    for (int i = 1; i < modes.size(); ++i) {
      const double p = modes.p_norm(i);
      if (p >= opt.mu && opt.mu > 0.0)
        p_high.push_back(modes[i]);
      if (opt.nu > 0.0 && p <= opt.nu)
        p_low.push_back(modes[i]);
    }
    const auto cubic =
        build_cubic_generator(eta_h, p_high, p_low, CubicWeights::plain, basis_e);
    rep.cubic_dropped_terms = cubic.dropped_terms;
    {
      // <Omega, e^{-A} G e^{A} Omega> = <T(eta) e^{A} Omega, L T(eta) e^{A} Omega>
      Eigen::VectorXd full = t_eta.apply(apply_exponential(cubic.mat, omega));
      StageReport st{"e^A", full.dot(l_exc * full), std::nullopt};
      if (g_dense) {
        const Eigen::MatrixXd ea = matrix_exponential(cubic.mat);
        const Eigen::MatrixXd r = ea.transpose() * (*g_dense) * ea;
        st.spectrum_drift = drift_of(r);
        g_dense = r;
      }
      rep.stages.push_back(st);
    }

    // tau from the renormalized coefficient pipeline on the mode shells
    std::vector<double> shells;
    for (int i = 1; i < modes.size(); ++i)
      shells.push_back(modes.p_norm(i));
    std::sort(shells.begin(), shells.end());
    shells.erase(std::unique(shells.begin(), shells.end()), shells.end());
    const auto coeffs =
        renormalized_coefficients(pot, opt.n_particles,
                                  opt.mu > 0 ? opt.mu : 1e-12, shells);
    auto tau_of = [&](double p) {
      for (const auto &row : coeffs.rows)
        if (std::abs(row.p - p) < 1e-9)
          return row.tau;
      return 0.0;
    };
    const auto tau = eta_on_modes(modes, tau_of);
    const auto t_tau = build_generalized_bogoliubov(tau, basis_e);
    {
      Eigen::VectorXd full = t_eta.apply(
          apply_exponential(cubic.mat, t_tau.apply(omega)));
      StageReport st{"T(tau)", full.dot(l_exc * full), std::nullopt};
      if (g_dense) {
        const Eigen::MatrixXd tt = t_tau.matrix();
        const Eigen::MatrixXd m = tt.transpose() * (*g_dense) * tt;
        st.spectrum_drift = drift_of(m);
      }
      rep.stages.push_back(st);
    }

    // overlaps: dressed trial state U^* T(eta_H) e^{A~} T(tau) Omega with the
    // dressed cubic weights, against the exact ground state
    const auto cubic_dressed =
        build_cubic_generator(eta_h, p_high, p_low, CubicWeights::dressed, basis_e);
    Eigen::VectorXd trial =
        t_eta.apply(apply_exponential(cubic_dressed.mat, t_tau.apply(omega)));
    Eigen::VectorXd trial_particle = SpMat(u.transpose()) * trial;
    trial_particle.normalize();
    rep.overlap_dressed = std::pow(gs.vector.dot(trial_particle), 2);
  }

  {
    Eigen::VectorXd bare = SpMat(u.transpose()) * omega;
    rep.overlap_bare = std::pow(gs.vector.dot(bare), 2);
    Eigen::VectorXd pair_particle = SpMat(u.transpose()) * chain;
    pair_particle.normalize();
    rep.overlap_pair = std::pow(gs.vector.dot(pair_particle), 2);
    if (!opt.cascade)
      rep.overlap_dressed = rep.overlap_pair;
  }
  return rep;
}

} // namespace bosegas::fock
