#include "catch2/catch.hpp"

#include <cmath>

#include "bosegas/potential.hpp"
#include "bosegas/potential_io.hpp"

using namespace bosegas;

namespace {

RadialPotential sampled_bump(double v0, double range, int n = 80) {
  std::vector<std::pair<double, double>> samples;
  const auto bump = RadialPotential::smooth_bump(v0, range);
  for (int i = 0; i <= n; ++i) {
    const double r = range * i / n;
    samples.emplace_back(r, bump(r));
  }
  return RadialPotential::tabulated(std::move(samples));
}

} // namespace

TEST_CASE("potential validation", "[potential]") {
  CHECK_THROWS_AS(RadialPotential::square_well(-1.0, 1.0), precondition_error);
  CHECK_THROWS_AS(RadialPotential::square_well(1.0, 0.0), precondition_error);
  CHECK_THROWS_AS(RadialPotential::tabulated({{0.0, 1.0}, {0.5, -0.1}, {1.0, 0.0}}),
                  precondition_error);
  CHECK_THROWS_AS(RadialPotential::tabulated({{0.5, 1.0}, {0.2, 1.0}}), precondition_error);
  // support is exact: V(r) = 0 beyond R
  const auto sw = RadialPotential::square_well(2.0, 1.0);
  CHECK(sw(1.0 + 1e-14) == 0.0);
  CHECK(sw(0.999999) == 2.0);
  CHECK(std::isfinite(sw.second_moment()));
}

TEST_CASE("square well Fourier transform closed forms", "[potential]") {
  const double v0 = 2.0, r = 1.0;
  const auto sw = RadialPotential::square_well(v0, r);
  // k = 0: (4 pi / 3) V0 R^3
  CHECK(fourier_transform(sw, 0.0) == Approx(4.0 * pi / 3.0 * v0).epsilon(1e-14));
  // k > 0: 4 pi V0 (sin kR - kR cos kR)/k^3
  for (double k : {0.3, 1.0, two_pi, 17.0}) {
    const double closed = 4.0 * pi * v0 * (std::sin(k * r) - k * r * std::cos(k * r)) / (k * k * k);
    CHECK(fourier_transform(sw, k) == Approx(closed).epsilon(1e-12));
  }
  // the small-argument series matches the direct evaluation near the seam
  for (double x : {0.3, 0.45, 0.49}) {
    const double direct = (std::sin(x) - x * std::cos(x)) / (x * x * x);
    CHECK(sin_minus_xcos_over_x3(x) == Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("Vhat(0) equals 4 pi int r^2 V for every kind", "[potential]") {
  const std::vector<RadialPotential> pots = {
      RadialPotential::square_well(2.0, 1.0),
      RadialPotential::smooth_bump(3.0, 1.2),
      sampled_bump(1.5, 0.8),
  };
  for (const auto &p : pots)
    CHECK(fourier_transform(p, 0.0) == Approx(4.0 * pi * p.second_moment()).epsilon(1e-10));
}

TEST_CASE("|Vhat(k)| <= Vhat(0) for nonnegative potentials", "[potential]") {
  const std::vector<RadialPotential> pots = {
      RadialPotential::square_well(2.0, 1.0),
      RadialPotential::smooth_bump(3.0, 1.2),
      sampled_bump(1.5, 0.8),
  };
  for (const auto &p : pots) {
    const double v0 = fourier_transform(p, 0.0);
    for (int i = 1; i <= 40; ++i)
      CHECK(std::abs(fourier_transform(p, 0.45 * i)) <= v0 * (1.0 + 1e-12));
  }
}

TEST_CASE("tabulated transform against a 10x resolution oracle", "[potential]") {
  const auto coarse = sampled_bump(1.5, 1.0, 80);
  const auto fine = sampled_bump(1.5, 1.0, 800);
  // the interpolants differ by their grids only; at 2 pi both should agree
  // with the smooth bump to the interpolation error, and the coarse table
  // matches its own high-order quadrature oracle to 1e-10 relative
  const double k = two_pi;
  const double via_library = fourier_transform(coarse, k);
  // independent oracle: fixed-order composite Simpson at 10x resolution on
  // the same interpolant
  const int n = 16000;
  double acc = 0.0;
  const double h = coarse.range() / n;
  for (int i = 0; i <= n; ++i) {
    const double r = h * i;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    acc += w * r * r * coarse(r) * sinc(k * r);
  }
  acc *= 4.0 * pi * h / 3.0;
  CHECK(via_library == Approx(acc).epsilon(1e-10));
  CHECK(via_library == Approx(fourier_transform(fine, k)).epsilon(1e-4));
}

TEST_CASE("rescaling bookkeeping", "[potential]") {
  const auto sw = RadialPotential::square_well(2.0, 1.0);
  CHECK_THROWS_AS(rescale(sw, 0, 1.0, 1.0), precondition_error);
  CHECK_THROWS_AS(rescale(sw, 10, 1.5, 1.0), precondition_error);
  CHECK_THROWS_AS(rescale(sw, 10, 0.5, 0.0), precondition_error);

  // beta = 0, kappa = 1: potential unchanged except the 1/N prefactor
  const auto mf = rescale(sw, 7, 0.0, 1.0);
  CHECK(mf.support() == Approx(1.0));
  for (double r : {0.1, 0.5, 0.9})
    CHECK(mf(r) == Approx(sw(r) / 7.0).epsilon(1e-15));

  // Fourier transform of kappa N^{3 beta} V(N^beta .) is kappa Vhat(k/N^beta)
  for (double beta : {0.0, 0.5, 1.0}) {
    const auto sp = rescale(sw, 13, beta, 0.7);
    for (double k : {0.0, 1.0, two_pi, 40.0}) {
      const double lhs = sp.fourier_without_inv_n(k);
      const double rhs = 0.7 * fourier_transform(sw, k / std::pow(13.0, beta));
      CHECK(lhs == Approx(rhs).margin(1e-12 * std::abs(rhs) + 1e-14));
    }
  }
}

TEST_CASE("potential JSON schema round trip", "[potential]") {
  const auto j = nlohmann::json::parse(R"({"kind": "square_well", "R": 1.5, "V0": 0.25})");
  const auto sw = potential_from_json(j);
  CHECK(sw.kind() == PotentialKind::square_well);
  CHECK(sw.range() == Approx(1.5));
  CHECK(sw(1.0) == Approx(0.25));
  const auto back = potential_to_json(sw);
  CHECK(back.at("kind") == "square_well");
  CHECK(back.at("R") == Approx(1.5));
  CHECK(back.at("V0") == Approx(0.25));

  const auto jt = nlohmann::json::parse(
      R"({"kind": "tabulated", "R": 1.0, "samples": [[0.0, 1.0], [0.5, 0.5], [1.0, 0.0]]})");
  const auto tab = potential_from_json(jt);
  CHECK(tab.kind() == PotentialKind::tabulated);
  CHECK(tab(0.25) == Approx(0.75).epsilon(1e-12));

  CHECK_THROWS_AS(potential_from_json(nlohmann::json::parse(R"({"kind": "zigzag"})")),
                  precondition_error);
}
