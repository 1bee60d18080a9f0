// SPDX-License-Identifier: Apache-2.0
#include "satmoe/numkernel.hpp"

#include <cmath>
#include <sstream>

#include "satmoe/errors.hpp"

namespace satmoe {

CMat::CMat(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, cplx{0.0, 0.0}) {
  if (rows == 0 || cols == 0) throw DimensionError("CMat: empty shape");
}

CMat CMat::identity(std::size_t n) {
  CMat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

CMat CMat::from_hermitian_rows(std::span<const CVec> rows) {
  if (rows.empty()) throw DimensionError("from_hermitian_rows: no rows");
  CMat m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols()) throw DimensionError("from_hermitian_rows: ragged rows");
    for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = std::conj(rows[r][c]);
  }
  return m;
}

CVec CMat::column(std::size_t c) const {
  CVec out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

CMat CMat::adjoint() const {
  CMat out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) out(c, r) = std::conj((*this)(r, c));
  return out;
}

CMat operator*(const CMat& a, const CMat& b) {
  if (a.cols() != b.rows()) throw DimensionError("matrix product: inner dimensions differ");
  CMat out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const cplx aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

cplx hermitian_inner(std::span<const cplx> a, std::span<const cplx> b) {
  if (a.size() != b.size()) {
    std::ostringstream os;
    os << "hermitian_inner: length mismatch (" << a.size() << " vs " << b.size() << ")";
    throw DimensionError(os.str());
  }
  cplx acc{0.0, 0.0};
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

double norm2(std::span<const cplx> a) noexcept {
  double acc = 0.0;
  for (const cplx& v : a) acc += std::norm(v);
  return acc;
}

namespace {

double one_norm(const CMat& m) {
  double best = 0.0;
  for (std::size_t c = 0; c < m.cols(); ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) s += std::abs(m(r, c));
    best = std::max(best, s);
  }
  return best;
}

// Inverse of a Hermitian positive-definite matrix via Cholesky. Returns false
// when a pivot is not strictly positive.
bool hpd_inverse(const CMat& a, CMat& inv) {
  const std::size_t n = a.rows();
  CMat l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j).real();
    for (std::size_t k = 0; k < j; ++k) d -= std::norm(l(j, k));
    if (!(d > 0.0) || !std::isfinite(d)) return false;
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      cplx s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * std::conj(l(j, k));
      l(i, j) = s / ljj;
    }
  }
  inv = CMat(n, n);
  for (std::size_t col = 0; col < n; ++col) {
    // L y = e_col, then L^H x = y.
    CVec y(n);
    for (std::size_t i = 0; i < n; ++i) {
      cplx s = (i == col) ? cplx{1.0, 0.0} : cplx{0.0, 0.0};
      for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
      y[i] = s / l(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
      cplx s = y[ii];
      for (std::size_t k = ii + 1; k < n; ++k) s -= std::conj(l(k, ii)) * inv(k, col);
      inv(ii, col) = s / l(ii, ii).real();
    }
  }
  return true;
}

}  // namespace

CMat right_pseudo_inverse(const CMat& g) {
  if (g.rows() > g.cols()) throw DimensionError("right_pseudo_inverse: G must be wide (rows <= cols)");
  const CMat gh = g.adjoint();
  const CMat gram = g * gh;
  CMat gram_inv;
  double rcond = 0.0;
  if (hpd_inverse(gram, gram_inv)) {
    const double denom = one_norm(gram) * one_norm(gram_inv);
    rcond = (denom > 0.0 && std::isfinite(denom)) ? 1.0 / denom : 0.0;
  }
  if (rcond < 1e-12) {
    std::ostringstream os;
    os << "right_pseudo_inverse: G G^H is singular (rcond=" << rcond << ")";
    throw SingularMatrixError(os.str(), rcond);
  }
  return gh * gram_inv;
}

double bessel_j0(double x) {
  if (!std::isfinite(x)) throw DomainError("bessel_j0: non-finite argument");
  return std::cyl_bessel_j(0.0, std::abs(x));
}

}  // namespace satmoe
