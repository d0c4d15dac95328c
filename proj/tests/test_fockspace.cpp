#include "catch2/catch.hpp"

#include <cmath>
#include <random>

#include "bosegas/bogoliubov.hpp"
#include "bosegas/fockspace.hpp"
#include "bosegas/scattering.hpp"
#include "bosegas/simulate.hpp"

using namespace bosegas;
using namespace bosegas::fock;

namespace {

ModeSet three_modes() { return ModeSet::from_points({{0, 0, 0}, {1, 0, 0}, {-1, 0, 0}}); }

std::int64_t stars_and_bars(long n, int m) {
  std::int64_t v = 1;
  for (long i = 1; i <= m - 1; ++i)
    v = v * (n + i) / i;
  return v;
}

Eigen::VectorXd random_unit(int dim, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i)
    v[i] = g(rng);
  v.normalize();
  return v;
}

} // namespace

TEST_CASE("basis enumeration", "[fock]") {
  CHECK(FockBasis::particle(three_modes(), 1).dim() == 3);
  CHECK(FockBasis::particle(three_modes(), 2).dim() == 6);
  const auto m7 = ModeSet::ball(two_pi * 1.01);
  CHECK(m7.size() == 7);
  CHECK(FockBasis::particle(m7, 3).dim() == 84); // C(3+7-1, 3)

  // stars-and-bars across a grid of (modes, N)
  for (long n : {1L, 2L, 5L}) {
    CHECK(FockBasis::particle(m7, n).dim() == stars_and_bars(n, 7));
    // excitation space has the same dimension as the N-particle space
    CHECK(FockBasis::excitation(m7, n).dim() == FockBasis::particle(m7, n).dim());
  }

  // dimension overflow reports the computed dimension
  CHECK_THROWS_AS(FockBasis::particle(m7, 40, 1000), precondition_error);

  // sector grading: ordered by excitation number
  const auto b = FockBasis::particle(m7, 3);
  for (int i = 1; i < b.dim(); ++i)
    CHECK(b.sector(i) >= b.sector(i - 1));
}

TEST_CASE("Hamiltonian assembly", "[fock]") {
  const auto m7 = ModeSet::ball(two_pi * 1.01);
  const auto basis = FockBasis::particle(m7, 4);

  // V = 0: diagonal with entries sum n_p p^2
  const auto free = build_hamiltonian(RadialPotential::square_well(0.0, 1.0), 4, 1.0,
                                      1.0, basis);
  for (int i = 0; i < basis.dim(); ++i) {
    double kin = 0.0;
    for (int mm = 1; mm < m7.size(); ++mm)
      kin += static_cast<double>(basis.occupation(i, mm)) * m7.p2(mm);
    CHECK(free.op.mat.coeff(i, i) == Approx(kin));
  }
  CHECK(static_cast<std::size_t>(free.op.mat.nonZeros()) <=
        static_cast<std::size_t>(basis.dim()));

  const auto sw = RadialPotential::square_well(2.0, 1.0);
  const auto ham = build_hamiltonian(sw, 4, 1.0, 1.0, basis);
  CHECK(ham.op.hermiticity_defect() < 1e-12);
  CHECK(momentum_defect(ham.op.mat, basis) == 0.0);
  CHECK(ham.dropped_terms > 0);
  CHECK_FALSE(ham.op.number_blocked);
  CHECK(free.op.number_blocked); // V = 0 is diagonal, hence sector blocked

  // the ScaledPotential overload builds the identical matrix
  const auto via_scaled = build_hamiltonian(rescale(sw, 4, 1.0, 1.0), basis);
  CHECK(max_abs(SpMat(via_scaled.op.mat - ham.op.mat)) == 0.0);

  // excitation-number block structure after the excitation map: distance <= 2
  const auto exc = FockBasis::excitation(m7, 4);
  const SpMat u = excitation_map(basis, exc);
  const SpMat l = conjugate(ham.op.mat, SpMat(u.transpose()));
  CHECK(sector_bandwidth(l, exc) <= 2);
}

TEST_CASE("zero-momentum block oracles with a constant kernel", "[fock]") {
  const double v = 0.37;
  const double t = two_pi * two_pi;
  const auto modes = three_modes();

  { // N = 2: the block spans {(2,0,0), (0,1,1)}; closed-form eigenvalue
    const auto basis = FockBasis::particle(modes, 2);
    const auto ham = build_hamiltonian_with_kernel([&](double) { return v / 4.0; }, basis);
    // extract the block by momentum bookkeeping
    std::vector<int> idx;
    for (int i = 0; i < basis.dim(); ++i)
      if (basis.total_momentum(i) == Vec3i{0, 0, 0})
        idx.push_back(i);
    REQUIRE(idx.size() == 2);
    Eigen::Matrix2d block;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        block(a, b) = ham.op.mat.coeff(idx[static_cast<std::size_t>(a)],
                                       idx[static_cast<std::size_t>(b)]);
    Eigen::Matrix2d oracle;
    oracle << v / 2.0, v / std::sqrt(2.0), v / std::sqrt(2.0), 2.0 * t + v;
    CHECK((block - oracle).cwiseAbs().maxCoeff() < 1e-13);
    const double mean = 0.5 * (3.0 * v / 2.0 + 2.0 * t);
    const double disc = std::sqrt(std::pow(2.0 * t + v / 2.0, 2) + 2.0 * v * v);
    const auto gs = ground_state_lanczos(ham.op.mat, 1e-12, 80);
    CHECK(gs.value == Approx(mean - 0.5 * disc).epsilon(1e-13));
  }

  { // N = 4: the zero-momentum block is three dimensional
    const auto basis = FockBasis::particle(modes, 4);
    const auto ham = build_hamiltonian_with_kernel([&](double) { return v / 8.0; }, basis);
    std::vector<int> idx;
    for (int i = 0; i < basis.dim(); ++i)
      if (basis.total_momentum(i) == Vec3i{0, 0, 0})
        idx.push_back(i);
    REQUIRE(idx.size() == 3);
    Eigen::Matrix3d oracle;
    oracle << 1.5 * v, 0.5 * std::sqrt(3.0) * v, 0.0,                          //
        0.5 * std::sqrt(3.0) * v, 2.0 * t + 2.75 * v, 0.5 * std::sqrt(2.0) * v, //
        0.0, 0.5 * std::sqrt(2.0) * v, 4.0 * t + 2.5 * v;
    Eigen::Matrix3d block;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        block(a, b) = ham.op.mat.coeff(idx[static_cast<std::size_t>(a)],
                                       idx[static_cast<std::size_t>(b)]);
    CHECK((block - oracle).cwiseAbs().maxCoeff() < 1e-13);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(oracle);
    const auto gs = ground_state_lanczos(ham.op.mat, 1e-12, 80);
    CHECK(gs.value == Approx(es.eigenvalues()[0]).epsilon(1e-13));
  }
}

TEST_CASE("excitation map rules", "[fock]") {
  const long n = 4;
  const auto modes = ModeSet::ball(two_pi * 1.01);
  const auto bp = FockBasis::particle(modes, n);
  const auto be = FockBasis::excitation(modes, n);
  const SpMat u = excitation_map(bp, be);

  CHECK(unitarity_defect(u) == 0.0);

  const SpMat sqrt_nm = diagonal_op(be, [&](int i) {
    return std::sqrt(static_cast<double>(n) - be.sector(i));
  });

  // all four conjugation rules as exact matrix identities
  {
    const SpMat lhs = conjugate(pair_op(bp, 0, 0), SpMat(u.transpose()));
    const SpMat rhs =
        diagonal_op(be, [&](int i) { return static_cast<double>(n) - be.sector(i); });
    CHECK(max_abs(SpMat(lhs - rhs)) < 1e-12);
  }
  for (int p = 1; p < modes.size(); ++p) {
    CHECK(max_abs(SpMat(conjugate(pair_op(bp, p, 0), SpMat(u.transpose())) -
                        SpMat(a_create(be, p) * sqrt_nm))) < 1e-12);
    CHECK(max_abs(SpMat(conjugate(pair_op(bp, 0, p), SpMat(u.transpose())) -
                        SpMat(sqrt_nm * a_annihilate(be, p)))) < 1e-12);
    for (int q = 1; q < modes.size(); ++q)
      CHECK(max_abs(SpMat(conjugate(pair_op(bp, p, q), SpMat(u.transpose())) -
                          SpMat(a_create(be, p) * a_annihilate(be, q)))) < 1e-12);
  }

  // the pure condensate maps to the excitation vacuum
  std::vector<std::uint8_t> condensate(static_cast<std::size_t>(modes.size() - 1), 0);
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(bp.dim());
  psi[bp.index_of(condensate)] = 1.0;
  const Eigen::VectorXd mapped = u * psi;
  CHECK((mapped - vacuum_vector(be)).norm() == 0.0);

  // <psi, a*_0 a_0 psi> = N - <U psi, N_+ U psi> on random states
  const SpMat n00 = pair_op(bp, 0, 0);
  const SpMat nplus = number_excited(be);
  for (unsigned seed = 1; seed <= 10; ++seed) {
    const Eigen::VectorXd v = random_unit(bp.dim(), seed);
    const Eigen::VectorXd uv = u * v;
    CHECK(v.dot(n00 * v) ==
          Approx(static_cast<double>(n) - uv.dot(nplus * uv)).margin(1e-11));
  }
}

TEST_CASE("generalized Bogoliubov transformation", "[fock]") {
  const auto modes = ModeSet::ball(two_pi * 1.01);
  const long n = 4;
  const auto be = FockBasis::excitation(modes, n);

  // eta = 0 -> identity
  const std::vector<double> zero(static_cast<std::size_t>(modes.size()), 0.0);
  const auto t0 = build_generalized_bogoliubov(zero, be);
  CHECK(max_abs(t0.generator) == 0.0);
  CHECK(unitarity_defect(t0.matrix()) < 1e-14);

  // asymmetric eta violates the precondition
  std::vector<double> bad(static_cast<std::size_t>(modes.size()), 0.0);
  bad[1] = 0.1; // its negation partner stays 0
  CHECK_THROWS_AS(build_generalized_bogoliubov(bad, be), precondition_error);

  const auto sw = RadialPotential::square_well(2.0, 1.0);
  const auto neumann = solve_neumann(sw, n);
  const auto eta = eta_on_modes(modes, [&](double p) { return eta_kernel(neumann, p); });
  const auto t = build_generalized_bogoliubov(eta, be);
  CHECK(unitarity_defect(t.matrix()) < 1e-10);

  // number growth under conjugation: frozen reference ratios
  const SpMat nplus = number_excited(be);
  double worst1 = 0.0, worst2 = 0.0;
  for (unsigned seed = 1; seed <= 10; ++seed) {
    const Eigen::VectorXd xi = random_unit(be.dim(), 100 + seed);
    const Eigen::VectorXd txi = t.apply(xi);
    auto moment = [&](const Eigen::VectorXd &v, int pow) {
      double acc = 0.0;
      for (int i = 0; i < be.dim(); ++i)
        acc += v[i] * v[i] * std::pow(be.sector(i) + 1.0, pow);
      return acc;
    };
    worst1 = std::max(worst1, moment(txi, 1) / moment(xi, 1));
    worst2 = std::max(worst2, moment(txi, 2) / moment(xi, 2));
  }
  CHECK(worst1 <= 1.5 * 1.003); // frozen from the reference run
  CHECK(worst2 <= 1.5 * 1.004);
}

TEST_CASE("T(eta) vacuum pair density against sinh^2", "[fock]") {
  // brute-force reference space: 5 modes, N = 6
  const auto m5 =
      ModeSet::from_points({{0, 0, 0}, {1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}});
  const long n = 6;
  const auto be = FockBasis::excitation(m5, n);
  const auto sw = RadialPotential::square_well(2.0, 1.0);
  const auto neumann = solve_neumann(sw, n);
  const auto eta = eta_on_modes(m5, [&](double p) { return eta_kernel(neumann, p); });
  const auto t = build_generalized_bogoliubov(eta, be);
  const Eigen::VectorXd w = t.apply(vacuum_vector(be));
  const double lhs = w.dot(number_excited(be) * w);
  double sum_sinh2 = 0.0, eta_norm2 = 0.0;
  for (int i = 1; i < m5.size(); ++i) {
    sum_sinh2 += std::pow(std::sinh(eta[static_cast<std::size_t>(i)]), 2);
    eta_norm2 += std::pow(eta[static_cast<std::size_t>(i)], 2);
  }
  // finite-N correction bounded by c ||eta||^2 / N, c frozen at 1.01
  CHECK(std::abs(lhs - sum_sinh2) <=
        1.5 * 1.01 * eta_norm2 / static_cast<double>(n));
}

TEST_CASE("cubic generator", "[fock]") {
  const auto modes = ModeSet::ball(two_pi * std::sqrt(2.0) * 1.01);
  const long n = 3;
  const auto be = FockBasis::excitation(modes, n);
  std::vector<Vec3i> p_high, p_low;
  for (int i = 1; i < modes.size(); ++i)
    (modes[i].norm2() == 2 ? p_high : p_low).push_back(modes[i]);

  // eta = 0 -> A = 0
  const std::vector<double> zero(static_cast<std::size_t>(modes.size()), 0.0);
  const auto a0 = build_cubic_generator(zero, p_high, p_low, CubicWeights::plain, be);
  CHECK(max_abs(a0.mat) == 0.0);

  CHECK_THROWS_AS(
      build_cubic_generator(zero, p_high, p_high, CubicWeights::plain, be),
      precondition_error); // P_H and P_L must be disjoint

  const auto sw = RadialPotential::square_well(2.0, 1.0);
  const auto neumann = solve_neumann(sw, n);
  const auto eta = eta_on_modes(modes, [&](double p) { return eta_kernel(neumann, p); });
  const auto a = build_cubic_generator(eta, p_high, p_low, CubicWeights::plain, be);

  // exact skew symmetry and momentum conservation
  CHECK(max_abs(SpMat(a.mat + SpMat(a.mat.transpose()))) == 0.0);
  CHECK(momentum_defect(a.mat, be) == 0.0);

  // dropped count matches an independent enumeration
  long dropped = 0;
  for (const auto &r : p_high)
    for (const auto &v : p_low)
      if (modes.index_of(r + v) <= 0)
        ++dropped;
  CHECK(a.dropped_terms == dropped);
  CHECK(a.dropped_terms > 0);

  // e^A unitary, and conjugation keeps (N_+ + 1) within the frozen ratio on
  // low-sector states
  const Eigen::MatrixXd ea = matrix_exponential(a.mat);
  CHECK(unitarity_defect(ea) < 1e-10);
  double worst = 0.0;
  for (unsigned seed = 1; seed <= 20; ++seed) {
    Eigen::VectorXd xi = Eigen::VectorXd::Zero(be.dim());
    std::mt19937 rng(seed);
    std::normal_distribution<double> g;
    for (int i = 0; i < be.dim(); ++i)
      if (be.sector(i) <= 1)
        xi[i] = g(rng);
    xi.normalize();
    const Eigen::VectorXd exi = apply_exponential(a.mat, xi);
    auto moment = [&](const Eigen::VectorXd &v) {
      double acc = 0.0;
      for (int i = 0; i < be.dim(); ++i)
        acc += v[i] * v[i] * (be.sector(i) + 1.0);
      return acc;
    };
    worst = std::max(worst, moment(exi) / moment(xi));
  }
  CHECK(worst <= 1.5 * 1.0002); // frozen from the reference run

  // dressed weights: still exactly skew and momentum conserving
  const auto ad = build_cubic_generator(eta, p_high, p_low, CubicWeights::dressed, be);
  CHECK(max_abs(SpMat(ad.mat + SpMat(ad.mat.transpose()))) == 0.0);
  CHECK(momentum_defect(ad.mat, be) == 0.0);
}

TEST_CASE("Bogoliubov action residual d_p", "[fock]") {
  const auto m3 = three_modes();
  const std::vector<double> eta = {0.0, -0.08, -0.08};

  { // eta = 0: d_p vanishes identically
    const std::vector<double> zero = {0.0, 0.0, 0.0};
    const auto be = FockBasis::excitation(m3, 6);
    const auto t = build_generalized_bogoliubov(zero, be);
    CHECK(bogoliubov_residual(t.matrix(), zero, 1, 6, be) < 1e-13);
  }

  // fixed eta, growing N: the restricted norm decreases
  double prev = 1e300;
  for (long n : {4L, 8L, 16L}) {
    const auto be = FockBasis::excitation(m3, n);
    const auto t = build_generalized_bogoliubov(eta, be);
    const double d = bogoliubov_residual(t.matrix(), eta, 1, 2, be);
    CHECK(d < prev);
    prev = d;
  }

  // fixed N, growing sector cap: the restricted norm grows
  const auto be = FockBasis::excitation(m3, 8);
  const auto t = build_generalized_bogoliubov(eta, be);
  prev = -1.0;
  for (int k : {1, 2, 4, 6}) {
    const double d = bogoliubov_residual(t.matrix(), eta, 1, k, be);
    CHECK(d > prev);
    prev = d;
  }
}

TEST_CASE("conjugation", "[fock]") {
  const auto modes = ModeSet::ball(two_pi * 1.01);
  const long n = 4;
  const auto bp = FockBasis::particle(modes, n);
  const auto be = FockBasis::excitation(modes, n);
  const auto sw = RadialPotential::square_well(2.0, 1.0);
  const auto ham = build_hamiltonian(sw, n, 1.0, 1.0, bp);

  // W = I leaves H unchanged
  SpMat eye(bp.dim(), bp.dim());
  eye.setIdentity();
  CHECK(max_abs(SpMat(conjugate(ham.op.mat, eye) - ham.op.mat)) == 0.0);

  // unitary invariance of the spectrum under T(eta)
  const SpMat u = excitation_map(bp, be);
  const SpMat l = conjugate(ham.op.mat, SpMat(u.transpose()));
  const auto neumann = solve_neumann(sw, n);
  const auto eta = eta_on_modes(modes, [&](double p) { return eta_kernel(neumann, p); });
  const auto t = build_generalized_bogoliubov(eta, be);
  const Eigen::MatrixXd g = conjugate(l, t.matrix());
  CHECK(g.cwiseAbs().maxCoeff() > 0.0);
  CHECK((g - g.transpose()).cwiseAbs().maxCoeff() < 1e-10);
  const Eigen::VectorXd s0 = symmetric_spectrum(Eigen::MatrixXd(ham.op.mat));
  const Eigen::VectorXd s1 = symmetric_spectrum(g);
  CHECK((s0 - s1).cwiseAbs().maxCoeff() < 1e-9);

  // the dressed vacuum expectation drops below the bare one, N in {4, 6, 8}
  for (long nn : {4L, 6L, 8L}) {
    const auto bpn = FockBasis::particle(modes, nn);
    const auto ben = FockBasis::excitation(modes, nn);
    const auto hn = build_hamiltonian(sw, nn, 1.0, 1.0, bpn);
    const SpMat un = excitation_map(bpn, ben);
    const SpMat ln = conjugate(hn.op.mat, SpMat(un.transpose()));
    const auto nsn = solve_neumann(sw, nn);
    const auto etan = eta_on_modes(modes, [&](double p) { return eta_kernel(nsn, p); });
    const auto tn = build_generalized_bogoliubov(etan, ben);
    const Eigen::VectorXd omega = vacuum_vector(ben);
    const Eigen::VectorXd w = tn.apply(omega);
    CHECK(w.dot(ln * w) < omega.dot(ln * omega));
  }
}

TEST_CASE("ground state solver on operators", "[fock]") {
  const auto modes = ModeSet::ball(two_pi * 1.01);
  const auto bp = FockBasis::particle(modes, 4);
  const auto sw = RadialPotential::square_well(2.0, 1.0);
  const auto ham = build_hamiltonian(sw, 4, 1.0, 1.0, bp);

  // diagonal matrix: minimum diagonal entry
  const auto free =
      build_hamiltonian(RadialPotential::square_well(0.0, 1.0), 4, 1.0, 1.0, bp);
  CHECK(ground_state_lanczos(free.op.mat).value == Approx(0.0).margin(1e-10));

  const auto gs = ground_state_lanczos(ham.op.mat);
  CHECK(gs.residual < 1e-9);
  // variational principle on random normalized states
  for (unsigned seed = 1; seed <= 10; ++seed) {
    const Eigen::VectorXd phi = random_unit(bp.dim(), 600 + seed);
    CHECK(phi.dot(ham.op.mat * phi) >= gs.value - 1e-10);
  }
}

TEST_CASE("mean-field scaling sanity at beta = 0", "[fock]") {
  const auto modes = ModeSet::ball(two_pi * 1.01);
  const auto sw = RadialPotential::square_well(2.0, 1.0);
  const double kappa = 0.5;
  for (long n : {4L, 6L, 8L}) {
    const auto bp = FockBasis::particle(modes, n);
    const auto ham = build_hamiltonian(sw, n, 0.0, kappa, bp);
    const auto gs = ground_state_lanczos(ham.op.mat);
    const double mf = kappa * fourier_transform(sw, 0.0) * static_cast<double>(n - 1) / 2.0;
    // |E - kappa Vhat(0)(N-1)/2| below the frozen N-independent constant
    CHECK(std::abs(gs.value - mf) <= 1.5 * 0.0034);
  }
}

TEST_CASE("T(tau) is unitary and near-identity at large p", "[fock]") {
  const auto modes = ModeSet::ball(two_pi * 1.01);
  const auto be = FockBasis::excitation(modes, 4);
  const auto sw = RadialPotential::square_well(2.0, 1.0);
  std::vector<double> shells{two_pi};
  const auto co = renormalized_coefficients(sw, 4, two_pi * 0.99, shells);
  const auto tau = eta_on_modes(modes, [&](double p) {
    return (std::abs(p - two_pi) < 1e-9) ? co.rows[0].tau : 0.0;
  });
  const auto t_tau = build_generalized_bogoliubov(tau, be);
  CHECK(unitarity_defect(t_tau.matrix()) < 1e-10);
  // tau is the small diagonalizing rotation: well below the eta kernel
  CHECK(std::abs(tau[1]) < 0.1);
}

TEST_CASE("seeded Lanczos start vectors converge to the same pair", "[fock]") {
  const auto modes = ModeSet::ball(two_pi * 1.01);
  const auto bp = FockBasis::particle(modes, 4);
  const auto ham =
      build_hamiltonian(RadialPotential::square_well(2.0, 1.0), 4, 1.0, 1.0, bp);
  const auto base = ground_state_lanczos(ham.op.mat, 1e-10);
  for (unsigned seed : {1u, 7u, 42u}) {
    const auto stressed = ground_state_lanczos(ham.op.mat, 1e-10, 60, seed);
    CHECK(stressed.value == Approx(base.value).margin(1e-9));
  }
}

TEST_CASE("cascade with a populated low-momentum set", "[fock]") {
  // two shells: P_H is the sqrt(2) shell, P_L the unit shell, so the cubic
  // generator carries real terms through the cascade
  fock::SimulateOptions opt;
  opt.n_particles = 2;
  opt.p_max = two_pi * std::sqrt(2.0) * 1.01;
  opt.mu = two_pi * std::sqrt(2.0) * 0.99;
  opt.nu = two_pi * 1.01;
  opt.cascade = true;
  const auto well = RadialPotential::square_well(3.0, 0.8); // R/N < 1/2 at N = 2
  const auto rep = run_simulation(well, opt);
  CHECK(rep.dimension == 190); // C(2+18, 2)
  REQUIRE(rep.stages.size() == 4);
  for (const auto &st : rep.stages) {
    REQUIRE(st.spectrum_drift.has_value());
    CHECK(*st.spectrum_drift < 1e-9);
  }
  CHECK(rep.overlap_dressed <= 1.0 + 1e-12);
  CHECK(rep.overlap_dressed >= rep.overlap_bare - 1e-12);

  // the same system above the dense cap: vacuum expectations and overlaps
  // come from the exponential action alone and must match the dense run
  fock::SimulateOptions lean = opt;
  lean.dense_cap = 10;
  const auto rep2 = run_simulation(well, lean);
  REQUIRE(rep2.stages.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK_FALSE(rep2.stages[i].spectrum_drift.has_value());
    CHECK(rep2.stages[i].vacuum_expectation ==
          Approx(rep.stages[i].vacuum_expectation).margin(1e-10));
  }
  CHECK(rep2.overlap_dressed == Approx(rep.overlap_dressed).margin(1e-10));
}

TEST_CASE("overlap diagnostics", "[fock]") {
  // V = 0: the ground state is the pure condensate; overlap 1 with the
  // undressed trial state
  fock::SimulateOptions opt;
  opt.n_particles = 4;
  opt.p_max = two_pi * 1.01;
  opt.mu = two_pi * 0.99;
  const auto free = run_simulation(RadialPotential::square_well(0.0, 1.0), opt);
  CHECK(free.overlap_bare == Approx(1.0).epsilon(1e-10));
  CHECK(free.overlap_dressed == Approx(1.0).epsilon(1e-10));

  opt.cascade = true;
  const auto rep = run_simulation(RadialPotential::square_well(2.0, 1.0), opt);
  CHECK(rep.overlap_bare <= 1.0 + 1e-12);
  CHECK(rep.overlap_dressed <= 1.0 + 1e-12);
  // the dressed trial state beats the bare condensate on the frozen case
  CHECK(rep.overlap_dressed >= rep.overlap_bare);
  // cascade stages: vacuum expectation decreases through T(eta)
  REQUIRE(rep.stages.size() >= 2);
  CHECK(rep.stages[1].vacuum_expectation < rep.stages[0].vacuum_expectation);
  // spectrum drift stays at rounding level for every stage
  for (const auto &st : rep.stages) {
    REQUIRE(st.spectrum_drift.has_value());
    CHECK(*st.spectrum_drift < 1e-9);
  }
}
