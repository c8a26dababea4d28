#pragma once

#include <vector>

#include "oracle.hpp"
#include "semibandit/linalg.hpp"

namespace testing_helpers {

inline oracle::Mat to_rows(const semibandit::Matrix& m) {
  oracle::Mat out(m.dim(), oracle::Vec(m.dim()));
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t j = 0; j < m.dim(); ++j) out[i][j] = m(i, j);
  return out;
}

inline double max_diff(const semibandit::Matrix& a, const oracle::Mat& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j) worst = std::max(worst, std::abs(a(i, j) - b[i][j]));
  return worst;
}

}  // namespace testing_helpers
