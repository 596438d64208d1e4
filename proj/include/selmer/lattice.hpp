#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>

#include "selmer/cubic_field.hpp"
#include "selmer/zmat.hpp"

namespace selmer {

struct BoundExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Approximate T2 norm sum_sigma |sigma(x)|^2 (guides searches; all
// conclusions drawn from enumerated candidates are verified exactly).
double t2_norm_d(const CubicFieldCtx& K, const FE& x);

// Visit one of {v, -v} for every nonzero element of the lattice spanned by
// the columns of basis_cols (integral coordinates) whose T2 norm is at most
// bound (inflated by a small safety factor).  cb returning false stops the
// walk; the return value is false iff stopped early.  Throws BoundExceeded
// when the enumeration tree exceeds node_budget.
bool enumerate_below(const CubicFieldCtx& K, const ZMat& basis_cols,
                     double bound, const std::function<bool(const ZVec&)>& cb,
                     uint64_t node_budget = 50000000,
                     const double* row_weights = nullptr);

// A short nonzero vector of the lattice (LLL-reduced first basis vector),
// in integral coordinates.
ZVec short_vector(const CubicFieldCtx& K, const ZMat& basis_cols);

}  // namespace selmer
