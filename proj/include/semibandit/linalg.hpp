#pragma once

// Small dense linear algebra for the d <= 128 regime: square row-major
// matrices, Cholesky, and a positive-definite matrix kept jointly with its
// inverse under rank-1 updates.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "semibandit/rng.hpp"

namespace semibandit {

using Vector = std::vector<double>;

inline constexpr std::size_t kMaxDim = 128;

/// Thrown when a factorization meets a non-positive pivot.
class NumericDomainError : public std::domain_error {
 public:
  NumericDomainError(const std::string& what, std::size_t pivot)
      : std::domain_error(what), pivot_(pivot) {}
  std::size_t pivot() const { return pivot_; }

 private:
  std::size_t pivot_;
};

/// Square dense matrix, row-major.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t n, double fill = 0.0) : n_(n), a_(n * n, fill) {}

  static Matrix identity(std::size_t n, double scale = 1.0);
  static Matrix diagonal(std::span<const double> diag);

  std::size_t dim() const { return n_; }

  double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

  std::span<const double> row(std::size_t i) const { return {a_.data() + i * n_, n_}; }
  std::span<const double> data() const { return a_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
Vector mat_vec(const Matrix& m, std::span<const double> v);
Matrix mat_mul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);

/// vᵀ M v.
double quad_form(const Matrix& m, std::span<const double> v);

double max_abs_diff(const Matrix& a, const Matrix& b);
double max_asymmetry(const Matrix& m);
/// max |(a·b − I)_ij|
double identity_residual(const Matrix& a, const Matrix& b);

/// Lower-triangular L with L·Lᵀ = m. Throws NumericDomainError naming the
/// first pivot that is not strictly positive.
Matrix cholesky(const Matrix& m);

/// Inverse of a symmetric positive-definite matrix through its Cholesky
/// factor. The result is symmetrized.
Matrix spd_inverse(const Matrix& m);

/// mean + L·z with L = cholesky(cov), z standard normal drawn from rng.
/// An exactly-zero covariance yields mean without consuming draws.
Vector sample_mvn(std::span<const double> mean, const Matrix& cov, Rng& rng);

/// mean + scale·L·z for a precomputed lower factor L.
Vector sample_mvn_factor(std::span<const double> mean, const Matrix& lower, double scale, Rng& rng);

/// Positive-definite B = λI + Σ x xᵀ maintained together with B⁻¹.
///
/// The inverse follows each rank-1 term by Sherman–Morrison and is rebuilt
/// from B by a Cholesky solve every kRefreshInterval updates, which keeps
/// ‖B·B⁻¹ − I‖max below 1e-6 over long runs at d <= 32.
class PsdState {
 public:
  static constexpr std::size_t kRefreshInterval = 1000;

  PsdState(std::size_t dim, double ridge);

  std::size_t dim() const { return mat_.dim(); }
  double ridge() const { return ridge_; }
  std::size_t update_count() const { return update_count_; }
  const Matrix& mat() const { return mat_; }
  const Matrix& inv() const { return inv_; }

  /// B ← B + x xᵀ.
  void rank1_update(std::span<const double> x);

  /// xᵀ B⁻¹ x, clamped at zero.
  double mahalanobis_sq(std::span<const double> v) const;

 private:
  double ridge_;
  Matrix mat_;
  Matrix inv_;
  std::size_t update_count_ = 0;
  Vector scratch_;
};

}  // namespace semibandit
