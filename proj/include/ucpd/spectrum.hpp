#pragma once

// Eigenvalues of the centred kernel matrix A_m, the plug-in estimate of the spectrum of the
// integral operator whose eigenvalues weight the null limit processes.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "ucpd/core.hpp"
#include "ucpd/kernels.hpp"

namespace ucpd {

struct SpectrumEstimate {
  std::vector<double> lambdas;  // decreasing |lambda|
  std::size_t m = 0;
  double frobenius_sq = 0.0;

  /// Leading L eigenvalues (all of them when L is unset or too large).
  [[nodiscard]] std::vector<double> top(std::optional<std::size_t> L) const {
    if (!L || *L >= lambdas.size()) return lambdas;
    return {lambdas.begin(), lambdas.begin() + static_cast<std::ptrdiff_t>(*L)};
  }

  /// Smallest L with sum_{l > L} lambda_l^2 <= tol * sum lambda_l^2.
  [[nodiscard]] std::size_t truncation_rank(double tol = 1e-4) const {
    double total = 0.0;
    for (double l : lambdas) total += l * l;
    double tail = total;
    for (std::size_t L = 0; L < lambdas.size(); ++L) {
      if (tail <= tol * total) return L;
      tail -= lambdas[L] * lambdas[L];
    }
    return lambdas.size();
  }
};

/// (A_m)_{ij} = (1/m) (h(X_i, X_j) - hbar_i - hbar_j + grand_mean), with hbar_i the off-diagonal row
/// mean of h(X_i, .) and grand_mean the mean over pairs i < j. The diagonal uses h(X_i, X_i).
template <PairKernel K>
Eigen::MatrixXd build_centered_gram(const K& h, const Sample& training) {
  const auto m = static_cast<Eigen::Index>(training.size());
  if (m < 3) throw InputError("centred Gram matrix needs m >= 3");
  Eigen::MatrixXd H(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    H(i, i) = h(training[static_cast<std::size_t>(i)], training[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = i + 1; j < m; ++j) {
      const double v = h(training[static_cast<std::size_t>(i)], training[static_cast<std::size_t>(j)]);
      H(i, j) = v;
      H(j, i) = v;
    }
  }
  Eigen::VectorXd row_mean(m);
  long double pair_total = 0.0L;
  for (Eigen::Index i = 0; i < m; ++i) {
    long double s = 0.0L;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (j != i) s += H(i, j);
    }
    row_mean(i) = static_cast<double>(s / (m - 1));
    pair_total += s;
  }
  const double grand = static_cast<double>(pair_total / (static_cast<long double>(m) * (m - 1)));
  const double inv_m = 1.0 / static_cast<double>(m);
  Eigen::MatrixXd A(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = j; i < m; ++i) {
      const double v = inv_m * (((H(i, j) - row_mean(i)) - row_mean(j)) + grand);
      A(i, j) = v;
      A(j, i) = v;
    }
  }
  return A;
}

/// All eigenvalues of a symmetric matrix, ordered by decreasing magnitude.
inline SpectrumEstimate eigenvalues(const Eigen::MatrixXd& A, double symmetry_tol = 1e-10) {
  if (A.rows() != A.cols()) throw ContractViolation("eigenvalues: matrix is not square");
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > symmetry_tol * scale) {
    throw ContractViolation("eigenvalues: matrix is not symmetric");
  }
  SpectrumEstimate out;
  out.m = static_cast<std::size_t>(A.rows());
  out.frobenius_sq = A.squaredNorm();
  if (A.rows() == 0) return out;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(A, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("symmetric eigensolver did not converge");
  const auto& ev = solver.eigenvalues();
  out.lambdas.assign(ev.data(), ev.data() + ev.size());
  std::stable_sort(out.lambdas.begin(), out.lambdas.end(),
                   [](double a, double b) { return std::abs(a) > std::abs(b); });
  return out;
}

/// Convenience: centred Gram matrix then eigenvalues.
template <PairKernel K>
SpectrumEstimate estimate_spectrum(const K& h, const Sample& training) {
  return eigenvalues(build_centered_gram(h, training));
}

inline nlohmann::json spectrum_to_json(const SpectrumEstimate& s) {
  return {{"m", s.m}, {"lambdas", s.lambdas}};
}

inline SpectrumEstimate spectrum_from_json(const nlohmann::json& j) {
  if (!j.contains("lambdas") || !j.at("lambdas").is_array()) throw InputError("spectrum JSON needs a lambdas array");
  SpectrumEstimate s;
  s.lambdas = j.at("lambdas").get<std::vector<double>>();
  s.m = j.value("m", s.lambdas.size());
  std::stable_sort(s.lambdas.begin(), s.lambdas.end(), [](double a, double b) { return std::abs(a) > std::abs(b); });
  s.frobenius_sq = 0.0;
  for (double l : s.lambdas) s.frobenius_sq += l * l;
  return s;
}

}  // namespace ucpd
