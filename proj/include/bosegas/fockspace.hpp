#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "bosegas/common.hpp"
#include "bosegas/lattice.hpp"
#include "bosegas/linalg.hpp"
#include "bosegas/potential.hpp"

namespace bosegas::fock {

using bosegas::Vec3i;

// ---------------------------------------------------------------------------
// Mode sets: finite subsets of 2 pi Z^3 containing 0 and closed under
// negation.  Momenta are stored as integer points, physical momentum 2 pi n.
// ---------------------------------------------------------------------------

class ModeSet {
public:
  static ModeSet ball(double p_max) {
    require(p_max >= 0.0, "ModeSet: p_max must be >= 0");
    const auto s_max = static_cast<std::int64_t>((p_max / two_pi) * (p_max / two_pi) *
                                                 (1.0 + 1e-12));
    std::vector<Vec3i> pts = ball_points(std::max<std::int64_t>(s_max, 0));
    std::sort(pts.begin(), pts.end(), [](const Vec3i &a, const Vec3i &b) {
      if (a.norm2() != b.norm2())
        return a.norm2() < b.norm2();
      return a < b;
    });
    std::vector<Vec3i> modes{{0, 0, 0}};
    modes.insert(modes.end(), pts.begin(), pts.end());
    return ModeSet(std::move(modes));
  }

  static ModeSet from_points(std::vector<Vec3i> modes) { return ModeSet(std::move(modes)); }

  int size() const { return static_cast<int>(modes_.size()); }
  const Vec3i &operator[](int i) const { return modes_[static_cast<std::size_t>(i)]; }
  const std::vector<Vec3i> &points() const { return modes_; }

  int index_of(const Vec3i &p) const {
    if (std::abs(p.x) >= 1024 || std::abs(p.y) >= 1024 || std::abs(p.z) >= 1024)
      return -1; // outside the packed-key range, cannot be a mode
    const auto it = index_.find(key(p));
    return it == index_.end() ? -1 : it->second;
  }
  int negative_of(int i) const { return neg_[static_cast<std::size_t>(i)]; }

  double p_norm(int i) const {
    return two_pi * std::sqrt(static_cast<double>(modes_[static_cast<std::size_t>(i)].norm2()));
  }
  double p2(int i) const {
    return two_pi * two_pi * static_cast<double>(modes_[static_cast<std::size_t>(i)].norm2());
  }

private:
  explicit ModeSet(std::vector<Vec3i> modes) : modes_(std::move(modes)) {
    require(!modes_.empty() && modes_[0] == Vec3i{0, 0, 0},
            "ModeSet: mode 0 must be the zero momentum");
    for (std::size_t i = 0; i < modes_.size(); ++i) {
      require(index_.emplace(key(modes_[i]), static_cast<int>(i)).second,
              "ModeSet: duplicate mode");
    }
    neg_.resize(modes_.size());
    for (std::size_t i = 0; i < modes_.size(); ++i) {
      const int j = index_of(-modes_[i]);
      require(j >= 0, "ModeSet: not closed under negation");
      neg_[i] = j;
    }
  }

  static std::int64_t key(const Vec3i &p) {
    const auto enc = [](int v) { return static_cast<std::int64_t>(v + 1024); };
    return (enc(p.x) * 2048 + enc(p.y)) * 2048 + enc(p.z);
  }

  std::vector<Vec3i> modes_;
  std::unordered_map<std::int64_t, int> index_;
  std::vector<int> neg_;
};

// ---------------------------------------------------------------------------
// Occupation bases.  The N-particle basis holds occupations over all modes
// with sum N; the excitation basis holds occupations over the nonzero modes
// with sum <= N.  Both are ordered by (excitation number, lexicographic),
// which aligns the two enumerations pairwise.
// ---------------------------------------------------------------------------

class FockBasis {
public:
  enum class Kind { particle, excitation };

  static std::int64_t particle_dimension(int n_modes, long n) {
    // C(n + m - 1, m - 1) with overflow guard
    std::int64_t num = 1;
    for (long i = 1; i <= static_cast<long>(n_modes) - 1; ++i) {
      num = num * (n + i) / i;
      if (num > (std::int64_t{1} << 52))
        return std::int64_t{1} << 52;
    }
    return num;
  }

  static FockBasis particle(const ModeSet &modes, long n,
                            std::int64_t dim_cap = 200000) {
    return FockBasis(modes, n, Kind::particle, dim_cap);
  }
  static FockBasis excitation(const ModeSet &modes, long n,
                              std::int64_t dim_cap = 200000) {
    return FockBasis(modes, n, Kind::excitation, dim_cap);
  }

  Kind kind() const { return kind_; }
  long n_particles() const { return n_; }
  const ModeSet &modes() const { return modes_; }
  int dim() const { return static_cast<int>(states_.size()); }

  // occupations over the nonzero modes (both kinds expose the same view)
  const std::vector<std::uint8_t> &state(int i) const {
    return states_[static_cast<std::size_t>(i)];
  }
  int sector(int i) const { return sectors_[static_cast<std::size_t>(i)]; }

  long occupation(int i, int mode_idx) const {
    const auto &s = states_[static_cast<std::size_t>(i)];
    if (mode_idx == 0)
      return kind_ == Kind::particle ? n_ - sector(i) : 0;
    return s[static_cast<std::size_t>(mode_idx - 1)];
  }

  int index_of(const std::vector<std::uint8_t> &nonzero_occ) const {
    const auto it = index_.find(pack(nonzero_occ));
    return it == index_.end() ? -1 : it->second;
  }

  Vec3i total_momentum(int i) const {
    Vec3i t{0, 0, 0};
    const auto &s = states_[static_cast<std::size_t>(i)];
    for (std::size_t m = 0; m < s.size(); ++m) {
      const Vec3i &p = modes_[static_cast<int>(m) + 1];
      t.x += s[m] * p.x;
      t.y += s[m] * p.y;
      t.z += s[m] * p.z;
    }
    return t;
  }

private:
  FockBasis(const ModeSet &modes, long n, Kind kind, std::int64_t dim_cap)
      : modes_(modes), n_(n), kind_(kind) {
    require(n >= 1, "FockBasis: N must be >= 1");
    require(n <= 254, "FockBasis: N too large for occupation storage");
    const int m_exc = modes.size() - 1;
    std::int64_t expected = 0;
    if (kind == Kind::particle)
      expected = particle_dimension(modes.size(), n);
    else
      for (long k = 0; k <= n; ++k)
        expected += particle_dimension(m_exc, k);
    if (expected > dim_cap) {
      std::ostringstream os;
      os << "FockBasis: dimension " << expected << " exceeds cap " << dim_cap;
      throw precondition_error(os.str());
    }

    // sector k, then lexicographic over the nonzero-mode occupations
    std::vector<std::uint8_t> occ(static_cast<std::size_t>(m_exc), 0);
    for (long k = 0; k <= n; ++k)
      enumerate(occ, 0, k);
    for (std::size_t i = 0; i < states_.size(); ++i)
      index_.emplace(pack(states_[i]), static_cast<int>(i));
  }

  void enumerate(std::vector<std::uint8_t> &occ, std::size_t pos, long remaining) {
    if (pos == occ.size()) {
      if (remaining == 0) {
        states_.push_back(occ);
        long k = 0;
        for (auto v : occ)
          k += v;
        sectors_.push_back(static_cast<int>(k));
      }
      return;
    }
    if (pos + 1 == occ.size()) {
      if (remaining <= 254) {
        occ[pos] = static_cast<std::uint8_t>(remaining);
        enumerate(occ, pos + 1, 0);
        occ[pos] = 0;
      }
      return;
    }
    for (long c = remaining; c >= 0; --c) {
      occ[pos] = static_cast<std::uint8_t>(c);
      enumerate(occ, pos + 1, remaining - c);
    }
    occ[pos] = 0;
  }

  static std::string pack(const std::vector<std::uint8_t> &occ) {
    return std::string(reinterpret_cast<const char *>(occ.data()), occ.size());
  }

  ModeSet modes_;
  long n_;
  Kind kind_;
  std::vector<std::vector<std::uint8_t>> states_;
  std::vector<int> sectors_;
  std::unordered_map<std::string, int> index_;
};

inline FockBasis build_basis(const ModeSet &modes, long n,
                             std::int64_t dim_cap = 200000) {
  return FockBasis::particle(modes, n, dim_cap);
}

// ---------------------------------------------------------------------------
// Sparse operators with the diagnostic flags the verifier asserts.
// ---------------------------------------------------------------------------

struct SparseOperator {
  SpMat mat;
  bool hermitian = false;
  bool number_blocked = false; // block diagonal in the excitation number

  double hermiticity_defect() const {
    SpMat diff = SpMat(mat.transpose()) - mat;
    return max_abs(diff);
  }
};

// max |sector(i) - sector(j)| over nonzero entries
inline int sector_bandwidth(const SpMat &m, const FockBasis &basis) {
  int band = 0;
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it)
      if (it.value() != 0.0)
        band = std::max(band, std::abs(basis.sector(static_cast<int>(it.row())) -
                                       basis.sector(static_cast<int>(it.col()))));
  return band;
}

// largest |entry| that links states of different total momentum (0 for every
// operator assembled here)
inline double momentum_defect(const SpMat &m, const FockBasis &basis) {
  double worst = 0.0;
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it)
      if (!(basis.total_momentum(static_cast<int>(it.row())) ==
            basis.total_momentum(static_cast<int>(it.col()))))
        worst = std::max(worst, std::abs(it.value()));
  return worst;
}

inline SpMat diagonal_op(const FockBasis &basis,
                         const std::function<double(int)> &value_of_state) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(basis.dim()));
  for (int i = 0; i < basis.dim(); ++i)
    trips.emplace_back(i, i, value_of_state(i));
  SpMat m(basis.dim(), basis.dim());
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

inline SpMat number_excited(const FockBasis &basis) {
  return diagonal_op(basis, [&](int i) { return static_cast<double>(basis.sector(i)); });
}

// a_p on the excitation basis (mode_idx > 0)
inline SpMat a_annihilate(const FockBasis &basis, int mode_idx) {
  require(basis.kind() == FockBasis::Kind::excitation,
          "a_annihilate: excitation basis required");
  require(mode_idx > 0 && mode_idx < basis.modes().size(), "a_annihilate: bad mode");
  std::vector<Eigen::Triplet<double>> trips;
  for (int i = 0; i < basis.dim(); ++i) {
    auto occ = basis.state(i);
    const auto slot = static_cast<std::size_t>(mode_idx - 1);
    if (occ[slot] == 0)
      continue;
    const double amp = std::sqrt(static_cast<double>(occ[slot]));
    occ[slot] -= 1;
    const int j = basis.index_of(occ);
    if (j >= 0)
      trips.emplace_back(j, i, amp);
  }
  SpMat m(basis.dim(), basis.dim());
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

inline SpMat a_create(const FockBasis &basis, int mode_idx) {
  return SpMat(a_annihilate(basis, mode_idx).transpose());
}

// b_p = sqrt((N - N_+)/N) a_p, the number-preserving annihilator; the square
// root acts on the post-annihilation sector so b*_p vanishes on the N_+ = N
// boundary and the truncated space is exactly invariant.
inline SpMat b_annihilate(const FockBasis &basis, int mode_idx) {
  const double n = static_cast<double>(basis.n_particles());
  SpMat a = a_annihilate(basis, mode_idx);
  SpMat d = diagonal_op(basis, [&](int i) {
    return std::sqrt(std::max(0.0, (n - basis.sector(i)) / n));
  });
  return SpMat(d * a);
}

inline SpMat b_create(const FockBasis &basis, int mode_idx) {
  return SpMat(b_annihilate(basis, mode_idx).transpose());
}

// a*_p a_q on the N-particle basis (either index may be the zero mode)
inline SpMat pair_op(const FockBasis &basis, int create_idx, int annihilate_idx) {
  require(basis.kind() == FockBasis::Kind::particle, "pair_op: particle basis required");
  std::vector<Eigen::Triplet<double>> trips;
  for (int i = 0; i < basis.dim(); ++i) {
    auto occ = basis.state(i);
    long n0 = basis.occupation(i, 0);
    double amp = 1.0;
    // annihilate
    if (annihilate_idx == 0) {
      if (n0 == 0)
        continue;
      amp *= std::sqrt(static_cast<double>(n0));
      n0 -= 1;
    } else {
      auto &v = occ[static_cast<std::size_t>(annihilate_idx - 1)];
      if (v == 0)
        continue;
      amp *= std::sqrt(static_cast<double>(v));
      v -= 1;
    }
    // create
    if (create_idx == 0) {
      amp *= std::sqrt(static_cast<double>(n0 + 1));
      n0 += 1;
    } else {
      auto &v = occ[static_cast<std::size_t>(create_idx - 1)];
      amp *= std::sqrt(static_cast<double>(v + 1));
      v += 1;
    }
    const int j = basis.index_of(occ);
    if (j >= 0)
      trips.emplace_back(j, i, amp);
  }
  SpMat m(basis.dim(), basis.dim());
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

// ---------------------------------------------------------------------------
// Hamiltonian sum_p p^2 a*_p a_p
//   + kappa/(2N) sum_{p,q,r} Vhat(r/N^beta) a*_{p+r} a*_q a_p a_{q+r},
// all four legs restricted to the mode set; momentum conserving terms only.
// ---------------------------------------------------------------------------

struct HamiltonianResult {
  SparseOperator op;
  long dropped_terms = 0; // (p,q,r) triples with a leg outside the mode set
};

// Generic builder: kinetic p^2 plus the quartic with per-transfer weight
// w(|r|) (already including every coupling prefactor).
inline HamiltonianResult
build_hamiltonian_with_kernel(const std::function<double(double)> &transfer_weight,
                              const FockBasis &basis) {
  require(basis.kind() == FockBasis::Kind::particle,
          "build_hamiltonian: particle basis required");
  const auto &modes = basis.modes();
  const int m = modes.size();

  // kept interaction terms: annihilators (m1, m2), creators (c1, c2) with
  // c2 = m1 + m2 - c1; transfer r = c1 - m1
  struct Term {
    int m1, m2, c1, c2;
    double w;
  };
  std::vector<Term> terms;
  long dropped = 0;
  for (int m1 = 0; m1 < m; ++m1)
    for (int m2 = 0; m2 < m; ++m2)
      for (int c1 = 0; c1 < m; ++c1) {
        const Vec3i c2v = modes[m1] + modes[m2] - modes[c1];
        const int c2 = modes.index_of(c2v);
        if (c2 < 0) {
          ++dropped;
          continue;
        }
        const Vec3i r = modes[c1] - modes[m1];
        const double w =
            transfer_weight(two_pi * std::sqrt(static_cast<double>(r.norm2())));
        if (w != 0.0)
          terms.push_back({m1, m2, c1, c2, w});
      }

  // assembly parallelizes over basis columns; per-column triplet lists are
  // concatenated in index order so the result is thread-count independent
  std::vector<std::vector<Eigen::Triplet<double>>> per_state(
      static_cast<std::size_t>(basis.dim()));
  parallel_for(static_cast<std::size_t>(basis.dim()), [&](std::size_t si) {
    const int i = static_cast<int>(si);
    auto &trips = per_state[si];
    std::vector<long> occ(static_cast<std::size_t>(m));
    for (int mm = 0; mm < m; ++mm)
      occ[static_cast<std::size_t>(mm)] = basis.occupation(i, mm);
    // kinetic
    double kin = 0.0;
    for (int mm = 1; mm < m; ++mm)
      kin += static_cast<double>(occ[static_cast<std::size_t>(mm)]) * modes.p2(mm);
    trips.emplace_back(i, i, kin);
    // interaction, applied right to left: a_{m2} a_{m1} a*_{c2} a*_{c1}
    std::vector<std::uint8_t> target(static_cast<std::size_t>(m - 1));
    for (const auto &t : terms) {
      double amp = t.w;
      long n_m2 = occ[static_cast<std::size_t>(t.m2)];
      if (n_m2 == 0)
        continue;
      amp *= std::sqrt(static_cast<double>(n_m2));
      long n_m1 = occ[static_cast<std::size_t>(t.m1)] - (t.m1 == t.m2 ? 1 : 0);
      if (n_m1 <= 0)
        continue;
      amp *= std::sqrt(static_cast<double>(n_m1));
      // occupations after both annihilations
      auto occ_after = [&](int mode) {
        long v = occ[static_cast<std::size_t>(mode)];
        if (mode == t.m1)
          --v;
        if (mode == t.m2)
          --v;
        return v;
      };
      const long n_c2 = occ_after(t.c2);
      amp *= std::sqrt(static_cast<double>(n_c2 + 1));
      const long n_c1 = occ_after(t.c1) + (t.c1 == t.c2 ? 1 : 0);
      amp *= std::sqrt(static_cast<double>(n_c1 + 1));

      for (int mm = 1; mm < m; ++mm) {
        long v = occ[static_cast<std::size_t>(mm)];
        if (mm == t.m1)
          --v;
        if (mm == t.m2)
          --v;
        if (mm == t.c1)
          ++v;
        if (mm == t.c2)
          ++v;
        target[static_cast<std::size_t>(mm - 1)] = static_cast<std::uint8_t>(v);
      }
      const int j = basis.index_of(target);
      if (j >= 0)
        trips.emplace_back(j, i, amp);
    }
  });
  std::vector<Eigen::Triplet<double>> trips;
  std::size_t total = 0;
  for (const auto &v : per_state)
    total += v.size();
  trips.reserve(total);
  for (const auto &v : per_state)
    trips.insert(trips.end(), v.begin(), v.end());

  HamiltonianResult out;
  out.dropped_terms = dropped;
  out.op.mat = SpMat(basis.dim(), basis.dim());
  out.op.mat.setFromTriplets(trips.begin(), trips.end());
  out.op.hermitian = true;
  out.op.number_blocked = (sector_bandwidth(out.op.mat, basis) == 0);
  return out;
}

// sum_p p^2 a*_p a_p + kappa/(2N) sum Vhat(r/N^beta) a*_{p+r} a*_q a_p a_{q+r}
inline HamiltonianResult build_hamiltonian(const RadialPotential &pot, long n,
                                           double beta, double kappa,
                                           const FockBasis &basis) {
  require(basis.n_particles() == n, "build_hamiltonian: N mismatch with basis");
  require(beta >= 0.0 && beta <= 1.0, "build_hamiltonian: beta in [0,1]");
  require(kappa >= 0.0, "build_hamiltonian: kappa must be >= 0");
  const double nbeta = std::pow(static_cast<double>(n), beta);
  const double pref = kappa / (2.0 * static_cast<double>(n));
  return build_hamiltonian_with_kernel(
      [&](double r_norm) { return pref * fourier_transform(pot, r_norm / nbeta); },
      basis);
}

inline HamiltonianResult build_hamiltonian(const ScaledPotential &pot,
                                           const FockBasis &basis) {
  return build_hamiltonian(pot.base(), pot.n_particles(), pot.beta(), pot.kappa(),
                           basis);
}

// ---------------------------------------------------------------------------
// Excitation map U_N: the unitary relabeling from the N-particle basis to the
// truncated excitation space (drop the condensate occupation).
// ---------------------------------------------------------------------------

inline SpMat excitation_map(const FockBasis &particle, const FockBasis &excitation) {
  require(particle.kind() == FockBasis::Kind::particle &&
              excitation.kind() == FockBasis::Kind::excitation,
          "excitation_map: basis kinds mismatch");
  require(particle.dim() == excitation.dim(),
          "excitation_map: spaces must have equal dimension");
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(particle.dim()));
  for (int i = 0; i < particle.dim(); ++i) {
    const int j = excitation.index_of(particle.state(i));
    require(j >= 0, "excitation_map: missing excitation state");
    trips.emplace_back(j, i, 1.0);
  }
  SpMat u(excitation.dim(), particle.dim());
  u.setFromTriplets(trips.begin(), trips.end());
  return u;
}

// ---------------------------------------------------------------------------
// Generalized Bogoliubov transformation T(eta) = exp(B), with
//   B = 1/2 sum_p eta_p (b*_p b*_{-p} - b_p b_{-p}).
// ---------------------------------------------------------------------------

inline SpMat pairing_generator(const FockBasis &basis, const std::vector<double> &eta) {
  require(basis.kind() == FockBasis::Kind::excitation,
          "pairing_generator: excitation basis required");
  const auto &modes = basis.modes();
  require(static_cast<int>(eta.size()) == modes.size(),
          "pairing_generator: eta must have one entry per mode");
  for (int i = 1; i < modes.size(); ++i)
    require(eta[static_cast<std::size_t>(i)] ==
                eta[static_cast<std::size_t>(modes.negative_of(i))],
            "pairing_generator: eta must be symmetric under p -> -p");
  SpMat b(basis.dim(), basis.dim());
  for (int i = 1; i < modes.size(); ++i) {
    const double e = eta[static_cast<std::size_t>(i)];
    if (e == 0.0)
      continue;
    const SpMat pair = SpMat(b_create(basis, i) * b_create(basis, modes.negative_of(i)));
    b += 0.5 * e * (pair - SpMat(pair.transpose()));
  }
  return b;
}

inline std::vector<double> eta_on_modes(const ModeSet &modes,
                                        const std::function<double(double)> &eta_radial) {
  std::vector<double> eta(static_cast<std::size_t>(modes.size()), 0.0);
  for (int i = 1; i < modes.size(); ++i)
    eta[static_cast<std::size_t>(i)] = eta_radial(modes.p_norm(i));
  return eta;
}

struct GeneralizedBogoliubov {
  SpMat generator;
  Eigen::MatrixXd matrix() const { return matrix_exponential(generator); }
  Eigen::VectorXd apply(const Eigen::VectorXd &v) const {
    return apply_exponential(generator, v);
  }
  Eigen::VectorXd apply_inverse(const Eigen::VectorXd &v) const {
    return apply_exponential(SpMat(-generator), v);
  }
};

inline GeneralizedBogoliubov
build_generalized_bogoliubov(const std::vector<double> &eta, const FockBasis &basis) {
  return {pairing_generator(basis, eta)};
}

// ---------------------------------------------------------------------------
// Cubic generator
//   A = N^{-1/2} sum_{r in P_H, v in P_L} eta_r [ b*_{r+v} a*_{-r} a_v - h.c. ]
// and the dressed variant
//   A~ = N^{-1/2} sum eta_r sigma_v [ b*_{r+v} b*_{-r} (gamma_v b_v
//                                      + sigma_v b*_{-v}) - h.c. ],
// gamma/sigma = cosh/sinh of the dressing kernel.  Terms with r+v outside
// the mode set are dropped and counted.
// ---------------------------------------------------------------------------

enum class CubicWeights { plain, dressed };

struct CubicGenerator {
  SpMat mat;
  long dropped_terms = 0;
};

inline CubicGenerator build_cubic_generator(const std::vector<double> &eta,
                                            const std::vector<Vec3i> &p_high,
                                            const std::vector<Vec3i> &p_low,
                                            CubicWeights weights,
                                            const FockBasis &basis,
                                            const std::vector<double> *dressing = nullptr) {
  require(basis.kind() == FockBasis::Kind::excitation,
          "build_cubic_generator: excitation basis required");
  const auto &modes = basis.modes();
  require(static_cast<int>(eta.size()) == modes.size(),
          "build_cubic_generator: eta must have one entry per mode");
  for (const auto &r : p_high)
    for (const auto &v : p_low)
      require(!(r == v), "build_cubic_generator: P_H and P_L must be disjoint");
  const std::vector<double> &dress = dressing ? *dressing : eta;

  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(basis.n_particles()));
  CubicGenerator out;
  SpMat a(basis.dim(), basis.dim());
  for (const auto &rv : p_high) {
    const int r = modes.index_of(rv);
    require(r > 0, "build_cubic_generator: P_H point outside the mode set");
    const double eta_r = eta[static_cast<std::size_t>(r)];
    for (const auto &vv : p_low) {
      const int v = modes.index_of(vv);
      require(v > 0, "build_cubic_generator: P_L point outside the mode set");
      const int rv_sum = modes.index_of(rv + vv);
      if (rv_sum <= 0) { // r + v escaped the truncation (or hit 0)
        ++out.dropped_terms;
        continue;
      }
      const int minus_r = modes.negative_of(r);
      SpMat mono;
      double coeff = eta_r * inv_sqrt_n;
      if (weights == CubicWeights::plain) {
        mono = SpMat(b_create(basis, rv_sum) *
                     SpMat(a_create(basis, minus_r) * a_annihilate(basis, v)));
      } else {
        const double ev = dress[static_cast<std::size_t>(v)];
        const double gamma_v = std::cosh(ev), sigma_v = std::sinh(ev);
        coeff *= sigma_v;
        if (coeff == 0.0)
          continue;
        const int minus_v = modes.negative_of(v);
        SpMat inner = gamma_v * b_annihilate(basis, v) +
                      sigma_v * b_create(basis, minus_v);
        mono = SpMat(b_create(basis, rv_sum) * SpMat(b_create(basis, minus_r) * inner));
      }
      a += coeff * (mono - SpMat(mono.transpose()));
    }
  }
  out.mat = a;
  return out;
}

// ---------------------------------------------------------------------------
// Conjugations, residuals and diagnostics
// ---------------------------------------------------------------------------

inline SpMat conjugate(const SpMat &h, const SpMat &w_unitary) {
  return SpMat(SpMat(w_unitary.transpose()) * SpMat(h * w_unitary));
}

inline Eigen::MatrixXd conjugate(const SpMat &h, const Eigen::MatrixXd &w_unitary) {
  return w_unitary.transpose() * (h * w_unitary);
}

inline double unitarity_defect(const Eigen::MatrixXd &w) {
  Eigen::MatrixXd g = w.transpose() * w;
  g.diagonal().array() -= 1.0;
  return g.cwiseAbs().maxCoeff();
}

inline double unitarity_defect(const SpMat &w) {
  SpMat g = SpMat(w.transpose()) * w;
  SpMat eye(w.cols(), w.cols());
  eye.setIdentity();
  return max_abs(SpMat(g - eye));
}

// || P_k (T^* b_p T - cosh(eta_p) b_p - sinh(eta_p) b*_{-p}) P_k ||_2
inline double bogoliubov_residual(const Eigen::MatrixXd &t_matrix,
                                  const std::vector<double> &eta, int mode_idx,
                                  int sector_cap, const FockBasis &basis) {
  require(mode_idx > 0 && mode_idx < basis.modes().size(),
          "bogoliubov_residual: bad mode");
  const double e = eta[static_cast<std::size_t>(mode_idx)];
  const int minus = basis.modes().negative_of(mode_idx);
  const Eigen::MatrixXd bp = Eigen::MatrixXd(b_annihilate(basis, mode_idx));
  const Eigen::MatrixXd bm_star = Eigen::MatrixXd(b_create(basis, minus));
  Eigen::MatrixXd d = t_matrix.transpose() * bp * t_matrix - std::cosh(e) * bp -
                      std::sinh(e) * bm_star;
  std::vector<int> keep;
  for (int i = 0; i < basis.dim(); ++i)
    if (basis.sector(i) <= sector_cap)
      keep.push_back(i);
  Eigen::MatrixXd sub(keep.size(), keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i)
    for (std::size_t j = 0; j < keep.size(); ++j)
      sub(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          d(keep[i], keep[j]);
  return spectral_norm(sub);
}

inline Eigen::VectorXd vacuum_vector(const FockBasis &excitation_basis) {
  require(excitation_basis.kind() == FockBasis::Kind::excitation,
          "vacuum_vector: excitation basis required");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(excitation_basis.dim());
  const std::vector<std::uint8_t> zero(
      static_cast<std::size_t>(excitation_basis.modes().size() - 1), 0);
  const int idx = excitation_basis.index_of(zero);
  require(idx >= 0, "vacuum_vector: missing vacuum state");
  v[idx] = 1.0;
  return v;
}

inline double vacuum_expectation(const SpMat &op, const FockBasis &basis) {
  const Eigen::VectorXd omega = vacuum_vector(basis);
  return omega.dot(op * omega);
}

} // namespace bosegas::fock
