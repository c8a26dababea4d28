#include "semibandit/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace semibandit {

namespace {

void require_dim(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (expected " +
                                std::to_string(expected) + ", got " + std::to_string(got) + ")");
  }
}

}  // namespace

Matrix Matrix::identity(std::size_t n, double scale) {
  Matrix m(n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = scale;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
  require_dim(a.size(), b.size(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

Vector mat_vec(const Matrix& m, std::span<const double> v) {
  require_dim(m.dim(), v.size(), "mat_vec");
  const std::size_t n = m.dim();
  Vector out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = m.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += r[j] * v[j];
    out[i] = s;
  }
  return out;
}

Matrix mat_mul(const Matrix& a, const Matrix& b) {
  require_dim(a.dim(), b.dim(), "mat_mul");
  const std::size_t n = a.dim();
  Matrix c(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Matrix transpose(const Matrix& m) {
  Matrix t(m.dim());
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t j = 0; j < m.dim(); ++j) t(j, i) = m(i, j);
  return t;
}

double quad_form(const Matrix& m, std::span<const double> v) {
  require_dim(m.dim(), v.size(), "quad_form");
  const std::size_t n = m.dim();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (v[i] == 0.0) continue;
    const auto r = m.row(i);
    double ri = 0.0;
    for (std::size_t j = 0; j < n; ++j) ri += r[j] * v[j];
    s += v[i] * ri;
  }
  return s;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  require_dim(a.dim(), b.dim(), "max_abs_diff");
  double worst = 0.0;
  const auto da = a.data();
  const auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) worst = std::max(worst, std::abs(da[i] - db[i]));
  return worst;
}

double max_asymmetry(const Matrix& m) {
  double worst = 0.0;
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t j = i + 1; j < m.dim(); ++j) worst = std::max(worst, std::abs(m(i, j) - m(j, i)));
  return worst;
}

double identity_residual(const Matrix& a, const Matrix& b) {
  return max_abs_diff(mat_mul(a, b), Matrix::identity(a.dim()));
}

Matrix cholesky(const Matrix& m) {
  const std::size_t n = m.dim();
  Matrix l(n);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = m(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > 0.0)) {
      throw NumericDomainError("cholesky: matrix is not positive definite at pivot " + std::to_string(j), j);
    }
    const double ljj = std::sqrt(diag);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

Matrix spd_inverse(const Matrix& m) {
  const std::size_t n = m.dim();
  const Matrix l = cholesky(m);
  Matrix inv(n);
  Vector y(n);
  for (std::size_t c = 0; c < n; ++c) {
    // L y = e_c
    for (std::size_t i = 0; i < n; ++i) {
      double s = (i == c) ? 1.0 : 0.0;
      for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
      y[i] = s / l(i, i);
    }
    // Lᵀ x = y
    for (std::size_t ii = n; ii-- > 0;) {
      double s = y[ii];
      for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * inv(k, c);
      inv(ii, c) = s / l(ii, ii);
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double avg = 0.5 * (inv(i, j) + inv(j, i));
      inv(i, j) = avg;
      inv(j, i) = avg;
    }
  return inv;
}

Vector sample_mvn_factor(std::span<const double> mean, const Matrix& lower, double scale, Rng& rng) {
  require_dim(lower.dim(), mean.size(), "sample_mvn");
  const std::size_t n = mean.size();
  Vector z(n);
  for (auto& zi : z) zi = rng.normal();
  Vector out(mean.begin(), mean.end());
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k <= i; ++k) s += lower(i, k) * z[k];
    out[i] += scale * s;
  }
  return out;
}

Vector sample_mvn(std::span<const double> mean, const Matrix& cov, Rng& rng) {
  require_dim(cov.dim(), mean.size(), "sample_mvn");
  const auto entries = cov.data();
  if (std::all_of(entries.begin(), entries.end(), [](double x) { return x == 0.0; })) {
    return Vector(mean.begin(), mean.end());
  }
  return sample_mvn_factor(mean, cholesky(cov), 1.0, rng);
}

PsdState::PsdState(std::size_t dim, double ridge) : ridge_(ridge) {
  if (dim == 0 || dim > kMaxDim) throw std::invalid_argument("PsdState: dimension must lie in [1, 128]");
  if (!(ridge > 0.0)) throw std::invalid_argument("PsdState: ridge must be positive");
  mat_ = Matrix::identity(dim, ridge);
  inv_ = Matrix::identity(dim, 1.0 / ridge);
  scratch_.assign(dim, 0.0);
}

void PsdState::rank1_update(std::span<const double> x) {
  const std::size_t n = dim();
  require_dim(n, x.size(), "rank1_update");
  ++update_count_;
  const bool refresh = update_count_ % kRefreshInterval == 0;
  if (std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; })) {
    if (refresh) inv_ = spd_inverse(mat_);
    return;
  }

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) mat_(i, j) += x[i] * x[j];

  if (refresh) {
    inv_ = spd_inverse(mat_);
    return;
  }

  // Sherman–Morrison: B⁻¹ ← B⁻¹ − (B⁻¹x)(B⁻¹x)ᵀ / (1 + xᵀB⁻¹x)
  Vector& u = scratch_;
  double denom = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = inv_.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += r[j] * x[j];
    u[i] = s;
    denom += x[i] * s;
  }
  const double f = 1.0 / denom;
  for (std::size_t i = 0; i < n; ++i) {
    const double ui = u[i] * f;
    for (std::size_t j = 0; j < n; ++j) inv_(i, j) -= ui * u[j];
  }
}

double PsdState::mahalanobis_sq(std::span<const double> v) const {
  require_dim(dim(), v.size(), "mahalanobis_sq");
  return std::max(0.0, quad_form(inv_, v));
}

}  // namespace semibandit
