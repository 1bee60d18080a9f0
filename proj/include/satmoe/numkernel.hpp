// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace satmoe {

using cplx = std::complex<double>;

/// Column vector of complex doubles (beams, channels).
using CVec = std::vector<cplx>;

/// Dense row-major complex matrix.
class CMat {
 public:
  CMat() = default;
  CMat(std::size_t rows, std::size_t cols);

  static CMat identity(std::size_t n);
  /// Matrix whose r-th row is conj(rows[r]) - i.e. stacks h^H for each h.
  static CMat from_hermitian_rows(std::span<const CVec> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  cplx& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const cplx& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  const std::vector<cplx>& data() const noexcept { return data_; }

  CVec column(std::size_t c) const;
  CMat adjoint() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

CMat operator*(const CMat& a, const CMat& b);

/// sum_i conj(a_i) * b_i. Throws DimensionError on length mismatch.
cplx hermitian_inner(std::span<const cplx> a, std::span<const cplx> b);

/// sum_i |a_i|^2.
double norm2(std::span<const cplx> a) noexcept;

/// V = G^H (G G^H)^{-1} for a wide, full-row-rank G, so that G V = I.
/// Throws SingularMatrixError when the reciprocal 1-norm condition number of
/// G G^H falls below 1e-12, and DimensionError when rows > cols.
CMat right_pseudo_inverse(const CMat& g);

/// Bessel function of the first kind, order zero. Throws DomainError for
/// non-finite input.
double bessel_j0(double x);

}  // namespace satmoe
