#include "catch2/catch.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "bosegas/lattice.hpp"
#include "bosegas/scattering.hpp"

using namespace bosegas;

TEST_CASE("three-squares table", "[lattice]") {
  const auto r3 = three_squares_table(10);
  CHECK(r3[0] == 1);
  CHECK(r3[1] == 6);
  CHECK(r3[2] == 12);
  CHECK(r3[3] == 8);
  CHECK(r3[4] == 6);
  CHECK(r3[5] == 24);
  CHECK(r3[7] == 0); // 7 is not a sum of three squares
  // total count matches the ball enumeration
  std::int64_t total = 0;
  for (int s = 1; s <= 10; ++s)
    total += r3[static_cast<std::size_t>(s)];
  CHECK(total == static_cast<std::int64_t>(ball_points(10).size()));
}

TEST_CASE("cube enumeration count", "[lattice]") {
  for (int m : {1, 2, 5})
    CHECK(cube_point_count(m) == (2 * m + 1) * (2 * m + 1) * (2 * m + 1) - 1);
}

TEST_CASE("cube partial sums of cos(|p|)/p^2", "[lattice]") {
  // M = 1: 26 points with |p|^2 in {1, 2, 3}
  const double expected =
      6.0 * std::cos(1.0) + 6.0 * std::cos(std::sqrt(2.0)) +
      8.0 / 3.0 * std::cos(std::sqrt(3.0));
  CHECK(e_lambda_partials(1)[0] == Approx(expected).epsilon(1e-13));

  // octant symmetry: the weighted octant enumeration equals the full cube sum
  double full = 0.0;
  for (int x = -2; x <= 2; ++x)
    for (int y = -2; y <= 2; ++y)
      for (int z = -2; z <= 2; ++z) {
        if (x == 0 && y == 0 && z == 0)
          continue;
        const double s = static_cast<double>(x * x + y * y + z * z);
        full += std::cos(std::sqrt(s)) / s;
      }
  CHECK(e_lambda_partials(2)[1] == Approx(full).epsilon(1e-13));
}

TEST_CASE("e_lambda estimates", "[lattice]") {
  CHECK_THROWS_AS(e_lambda(1), precondition_error); // averaged needs M >= 2
  CHECK_THROWS_AS(e_lambda(60, "zigzag"), precondition_error);

  // raw partial at level 1 is the 26-point enumeration
  const auto raw1 = e_lambda(1, "raw");
  CHECK(raw1.cos_sum == Approx(3.7493252343).epsilon(1e-9));

  const auto raw = e_lambda(40, "raw");
  CHECK(raw.warning); // raw cube partials are not Cauchy at small M

  const auto avg = e_lambda(120, "averaged");
  const auto abel = e_lambda_abel();
  CHECK(std::abs(avg.value - abel.value) < 1e-3);
  // a second Abel ladder lands on the same extrapolation
  const auto abel2 = e_lambda_abel({0.2, 0.15, 0.1, 0.075, 0.05});
  CHECK(abel.value == Approx(abel2.value).margin(1e-4));
  // averaged estimates Cauchy between M and M/2 within combined errors
  const auto avg60 = e_lambda(60, "averaged");
  CHECK(std::abs(avg.value - avg60.value) <= avg.error_estimate + avg60.error_estimate);
  // the affine map from the cube sum
  CHECK(avg.value == Approx(e_lambda_from_cos_sum(avg.cos_sum)));
}

TEST_CASE("Bogoliubov lattice sum", "[lattice]") {
  CHECK_THROWS_AS(bogoliubov_lattice_sum(-0.1), precondition_error);
  CHECK(bogoliubov_lattice_sum(0.0).value == 0.0);

  // summand asymptotics: ratio against -c^3/(2 p^4) tends to 1
  {
    const double c = 8.0 * pi * 0.01;
    const double p2 = std::pow(100.0 * two_pi, 2);
    const double summand = dispersion_deficit(p2, c) - c * c / (2.0 * p2);
    CHECK(summand / (-c * c * c / (2.0 * p2 * p2)) == Approx(1.0).epsilon(1e-5));
  }

  for (double a0 : {0.005, 0.01, 0.02}) {
    const auto full = bogoliubov_lattice_sum(a0, 160);
    const auto half = bogoliubov_lattice_sum(a0, 80);
    // every bracket [p^2 + c - sqrt(p^4+2cp^2) - c^2/(2p^2)] is negative, so
    // the -1/2-weighted total is positive (the box analogue of the positive
    // second-order energy correction)
    CHECK(full.value > 0.0);
    CHECK(std::abs(full.value - half.value) <=
          full.error_estimate + half.error_estimate);
    CHECK(full.error_estimate < 1e-8);
  }
}

TEST_CASE("literal lattice Born terms", "[lattice]") {
  const auto sw = RadialPotential::square_well(0.1, 1.0);
  auto vhat = [&](double q) { return fourier_transform(sw, q); };
  const double n = 50.0;

  auto points = ball_points(36);
  // k = 1 equals the discrete second Born analogue -(1/2N) sum Vhat^2/p^2
  double direct = 0.0;
  for (const auto &p : points) {
    const double p2 = two_pi * two_pi * p.norm2();
    const double v = vhat(two_pi * std::sqrt(static_cast<double>(p.norm2())) / n);
    direct += v * v / p2;
  }
  direct *= -1.0 / (2.0 * n);
  CHECK(lattice_born_term(points, n, 1, vhat) == Approx(direct).epsilon(1e-12));

  // enumeration-order invariance at fixed truncation
  auto shuffled = points;
  std::mt19937 rng(99);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  for (int k : {1, 2}) {
    const double a = lattice_born_term(points, n, k, vhat);
    const double b = lattice_born_term(shuffled, n, k, vhat);
    CHECK(a == Approx(b).epsilon(1e-10));
  }

  // the orbit-reduced fast path reproduces the plain evaluation
  const double plain2 = lattice_born_term(points, n, 2, vhat);
  const double fast2 = detail::lattice_born_term_fast(36, n, 2, vhat);
  CHECK(plain2 == Approx(fast2).epsilon(1e-11));
}

TEST_CASE("finite-volume scattering length", "[lattice]") {
  // V = 0 -> a_Lambda = 0
  const auto zero =
      finite_volume_scattering_length(RadialPotential::square_well(0.0, 1.0), 100, 1, 8);
  CHECK(zero.a_lattice == 0.0);

  CHECK_THROWS_AS(
      finite_volume_scattering_length(RadialPotential::square_well(1.0, 1.0), 100, 0, 8),
      precondition_error);

  // weak well at moderate N already lands near the e_Lambda prediction
  const auto pot = RadialPotential::square_well(0.02, 1.0);
  const auto fv = finite_volume_scattering_length(pot, 2000, 1, 48);
  const double lhs = 4.0 * pi * 1999.0 * (fv.a0 - fv.a_lattice);
  const double rhs = e_lambda(120).value * fv.a0 * fv.a0;
  CHECK(lhs / rhs == Approx(1.0).margin(0.05));

  // strong potential: term magnitudes stop decreasing and the warning trips
  const auto strong = RadialPotential::square_well(60.0, 1.0);
  const auto diverging = finite_volume_scattering_length(strong, 100, 2, 10);
  CHECK(diverging.divergence_warning);
}

TEST_CASE("sum vs integral check", "[lattice]") {
  CHECK_THROWS_AS(sum_vs_integral_check(0.01, 0.5), precondition_error);

  // closed-form coefficient
  CHECK(kLhyCoefficient == Approx(128.0 / (15.0 * std::sqrt(pi))).epsilon(1e-15));
  CHECK(kLhyCoefficient == Approx(4.81442).margin(1e-4));

  const auto zero = sum_vs_integral_check(0.0, 100.0);
  CHECK(zero.sum == 0.0);
  CHECK(zero.integral == 0.0);

  // ratio approaches 1 from below as the lattice spacing shrinks
  const auto r2 = sum_vs_integral_check(0.1, 100.0);
  const auto r3c = sum_vs_integral_check(0.1, 1000.0);
  CHECK(std::abs(r3c.ratio - 1.0) < std::abs(r2.ratio - 1.0));
  CHECK(r3c.integral ==
        Approx(4.0 * pi * 0.1 * kLhyCoefficient * std::pow(0.1, 1.5) *
               std::pow(1000.0, 2.5)));
}
