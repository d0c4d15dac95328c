#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>
#include <unsupported/Eigen/MatrixFunctions>

#include "bosegas/common.hpp"

namespace bosegas {

using SpMat = Eigen::SparseMatrix<double>;

inline double one_norm(const SpMat &a) {
  double best = 0.0;
  for (int k = 0; k < a.outerSize(); ++k) {
    double col = 0.0;
    for (SpMat::InnerIterator it(a, k); it; ++it)
      col += std::abs(it.value());
    best = std::max(best, col);
  }
  return best;
}

inline double max_abs(const SpMat &a) {
  double best = 0.0;
  for (int k = 0; k < a.outerSize(); ++k)
    for (SpMat::InnerIterator it(a, k); it; ++it)
      best = std::max(best, std::abs(it.value()));
  return best;
}

// dense exponential by scaling-and-squaring (Pade), for the unitary factor
// of a cascade stage
inline Eigen::MatrixXd matrix_exponential(const SpMat &generator) {
  Eigen::MatrixXd dense = Eigen::MatrixXd(generator);
  return dense.exp();
}

// e^A v by scaled Taylor steps; A skew-symmetric generators keep this stable
inline Eigen::VectorXd apply_exponential(const SpMat &a, const Eigen::VectorXd &v,
                                         double tol = 1e-14) {
  const double norm = one_norm(a);
  const int steps = std::max(1, static_cast<int>(std::ceil(norm / 0.5)));
  Eigen::VectorXd y = v;
  for (int s = 0; s < steps; ++s) {
    Eigen::VectorXd term = y;
    Eigen::VectorXd acc = y;
    for (int j = 1; j <= 120; ++j) {
      term = (a * term) / (static_cast<double>(steps) * j);
      acc += term;
      if (term.norm() <= tol * std::max(1.0, acc.norm()))
        break;
    }
    y = acc;
  }
  return y;
}

struct Eigenpair {
  double value = 0.0;
  Eigen::VectorXd vector;
  double residual = 0.0;
  int iterations = 0;
};

// Lowest eigenpair of a real symmetric sparse matrix: Lanczos with full
// reorthogonalization and Ritz restarts.  Deterministic all-ones start so
// repeated runs are bit-identical; the seed parameter only perturbs the
// start vector for convergence stress tests.
inline Eigenpair ground_state_lanczos(const SpMat &h, double tol = 1e-9,
                                      int max_restarts = 60, unsigned seed = 0) {
  const auto n = static_cast<int>(h.rows());
  require(n >= 1, "ground_state_lanczos: empty matrix");
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
  if (seed != 0) {
    for (int i = 0; i < n; ++i)
      v[i] += 1e-3 * std::sin(static_cast<double>(seed) * (i + 1.0));
  }
  v.normalize();

  Eigenpair out;
  const int m_max = std::min(n, 120);
  for (int restart = 0; restart < max_restarts; ++restart) {
    std::vector<Eigen::VectorXd> basis;
    basis.reserve(static_cast<std::size_t>(m_max));
    std::vector<double> alpha, beta;
    Eigen::VectorXd w;
    basis.push_back(v);
    for (int j = 0; j < m_max; ++j) {
      w = h * basis.back();
      const double a = basis.back().dot(w);
      alpha.push_back(a);
      w -= a * basis.back();
      if (j > 0)
        w -= beta.back() * basis[basis.size() - 2];
      // full reorthogonalization
      for (const auto &q : basis)
        w -= q.dot(w) * q;
      const double b = w.norm();
      if (b < 1e-14 || j == m_max - 1)
        break;
      beta.push_back(b);
      basis.push_back(w / b);
    }
    const auto m = static_cast<int>(alpha.size());
    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      tri(i, i) = alpha[static_cast<std::size_t>(i)];
      if (i + 1 < m) {
        tri(i, i + 1) = beta[static_cast<std::size_t>(i)];
        tri(i + 1, i) = beta[static_cast<std::size_t>(i)];
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
    const Eigen::VectorXd ritz = es.eigenvectors().col(0);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < m; ++i)
      x += ritz[i] * basis[static_cast<std::size_t>(i)];
    x.normalize();
    const double theta = x.dot(h * x);
    const double res = (h * x - theta * x).norm();
    out.value = theta;
    out.vector = x;
    out.residual = res;
    out.iterations = restart + 1;
    if (res < tol)
      return out;
    v = x;
  }
  throw numerical_error("ground_state_lanczos: no convergence, residual " +
                        std::to_string(out.residual));
}

// sorted eigenvalues of a dense symmetric matrix
inline Eigen::VectorXd symmetric_spectrum(const Eigen::MatrixXd &h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

// operator 2-norm via power iteration on A^T A (deterministic start)
inline double spectral_norm(const Eigen::MatrixXd &a, int iters = 300) {
  if (a.rows() == 0 || a.cols() == 0)
    return 0.0;
  Eigen::VectorXd v = Eigen::VectorXd::Ones(a.cols()).normalized();
  double s = 0.0;
  for (int i = 0; i < iters; ++i) {
    Eigen::VectorXd w = a.transpose() * (a * v);
    const double nw = w.norm();
    if (nw == 0.0)
      return 0.0;
    v = w / nw;
    const double s_new = std::sqrt(nw);
    if (i > 8 && std::abs(s_new - s) < 1e-12 * std::max(1.0, s_new))
      return s_new;
    s = s_new;
  }
  return s;
}

} // namespace bosegas
