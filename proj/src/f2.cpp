#include "selmer/f2.hpp"

namespace selmer {

size_t F2Matrix::rank() const {
  F2Span sp(ncols);
  for (const auto& r : rows) sp.add(r);
  return sp.dim();
}

std::vector<F2Vec> F2Matrix::kernel() const {
  // Gaussian elimination on the transpose-free formulation: eliminate over
  // columns.  Track column combinations via an identity tail.
  size_t m = rows.size();
  std::vector<F2Vec> work;  // each: row of M^T extended by identity
  for (size_t j = 0; j < ncols; ++j) {
    F2Vec v(m + ncols);
    for (size_t i = 0; i < m; ++i) v.set(i, rows[i].get(j));
    v.set(m + j, true);
    work.push_back(v);
  }
  // echelonize on the first m coordinates
  std::vector<F2Vec> basis;
  std::vector<size_t> pivots;
  std::vector<F2Vec> ker;
  for (auto v : work) {
    for (size_t k = 0; k < basis.size(); ++k)
      if (pivots[k] < m && v.get(pivots[k])) v ^= basis[k];
    size_t p = v.lowest();
    if (p >= m) {
      // first m coords zero: kernel element, tail gives coefficients
      F2Vec c(ncols);
      for (size_t j = 0; j < ncols; ++j)
        if (v.get(m + j)) c.set(j, true);
      ker.push_back(c);
    } else {
      basis.push_back(v);
      pivots.push_back(p);
    }
  }
  return ker;
}

std::vector<F2Vec> preimage_basis(const std::vector<F2Vec>& img,
                                  const F2Span& span) {
  // c in kernel iff sum c_i img[i] reduces to zero mod span.
  size_t n = img.size();
  size_t w = span.width();
  F2Matrix M(n);
  // Build matrix whose columns are the span-residues of img[i].
  std::vector<F2Vec> res;
  res.reserve(n);
  for (const auto& v : img) res.push_back(span.reduce(v));
  for (size_t r = 0; r < w; ++r) {
    F2Vec row(n);
    for (size_t i = 0; i < n; ++i)
      if (res[i].get(r)) row.set(i, true);
    M.add_row(row);
  }
  return M.kernel();
}

}  // namespace selmer
