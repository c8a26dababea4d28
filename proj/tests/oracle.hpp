#pragma once

// Test-side reference computations. Nothing here calls into the library's
// linear algebra, so agreement with it is evidence rather than tautology.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace oracle {

using Mat = std::vector<std::vector<double>>;
using Vec = std::vector<double>;

inline Mat identity(std::size_t n, double s = 1.0) {
  Mat m(n, Vec(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = s;
  return m;
}

// Gauss-Jordan with partial pivoting.
inline Mat inverse(Mat a) {
  const std::size_t n = a.size();
  Mat inv = identity(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    if (a[p][c] == 0.0) throw std::runtime_error("oracle::inverse: singular");
    std::swap(a[p], a[c]);
    std::swap(inv[p], inv[c]);
    const double piv = a[c][c];
    for (std::size_t k = 0; k < n; ++k) {
      a[c][k] /= piv;
      inv[c][k] /= piv;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c];
      if (f == 0.0) continue;
      for (std::size_t k = 0; k < n; ++k) {
        a[r][k] -= f * a[c][k];
        inv[r][k] -= f * inv[c][k];
      }
    }
  }
  return inv;
}

inline Vec mul(const Mat& m, const Vec& v) {
  Vec out(m.size(), 0.0);
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) out[i] += m[i][j] * v[j];
  return out;
}

inline double quad(const Mat& m, const Vec& v) {
  const Vec mv = mul(m, v);
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * mv[i];
  return s;
}

inline Vec sub(const Vec& a, const Vec& b) {
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

inline double inner(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline void add_outer(Mat& m, const Vec& x, double w = 1.0) {
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) m[i][j] += w * x[i] * x[j];
}

// Brute force over every unordered pair: the first pair (in i<j order) whose
// squared distance under minv is strictly largest.
inline std::pair<std::size_t, std::size_t> farthest_pair(const Mat& minv, const std::vector<Vec>& pts,
                                                         const std::vector<std::size_t>& idx) {
  std::pair<std::size_t, std::size_t> best{idx.front(), idx.front()};
  double best_d = 0.0;
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = a + 1; b < idx.size(); ++b) {
      const double d = quad(minv, sub(pts[idx[a]], pts[idx[b]]));
      if (d > best_d) {
        best_d = d;
        best = {idx[a], idx[b]};
      }
    }
  return best;
}

// Keep arm i when <mu, b_j - b_i> <= gamma * ||b_i - b_j||_{minv} for all j.
inline std::vector<std::size_t> survivors(const Mat& minv, const Vec& mu, const std::vector<Vec>& pts,
                                          double gamma) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool ok = true;
    for (std::size_t j = 0; j < pts.size() && ok; ++j) {
      const Vec diff = sub(pts[j], pts[i]);
      ok = inner(mu, diff) <= gamma * std::sqrt(std::max(0.0, quad(minv, diff)));
    }
    if (ok) keep.push_back(i);
  }
  return keep;
}

}  // namespace oracle
