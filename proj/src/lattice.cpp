#include "selmer/lattice.hpp"

#include <array>
#include <cmath>

namespace selmer {

namespace {

double rat_to_d(const Rat& q) { return q.get_d(); }

// real-ified embedding coordinates of x: (s1, s2, s3) for a totally real
// field, (s, sqrt2*Re c, sqrt2*Im c) otherwise; T2 = euclidean square norm
std::array<double, 3> embed_d(const CubicFieldCtx& K, const FE& x) {
  Embeddings E = K.embeddings(96);
  std::array<double, 3> out{};
  auto eval_real = [&](const Ival& r) {
    double t = (rat_to_d(r.lo) + rat_to_d(r.hi)) / 2;
    return rat_to_d(x.c[0]) + rat_to_d(x.c[1]) * t + rat_to_d(x.c[2]) * t * t;
  };
  if (K.r1 == 3) {
    for (int i = 0; i < 3; ++i) out[i] = eval_real(E.real_roots[i]);
  } else {
    out[0] = eval_real(E.real_roots[0]);
    double u = (rat_to_d(E.u.lo) + rat_to_d(E.u.hi)) / 2;
    double v = (rat_to_d(E.v.lo) + rat_to_d(E.v.hi)) / 2;
    double re = rat_to_d(x.c[0]) + rat_to_d(x.c[1]) * u +
                rat_to_d(x.c[2]) * (u * u - v * v);
    double im = rat_to_d(x.c[1]) * v + rat_to_d(x.c[2]) * 2 * u * v;
    const double s2 = std::sqrt(2.0);
    out[1] = s2 * re;
    out[2] = s2 * im;
  }
  return out;
}

// embedding evaluated with interval arithmetic at a precision matched to the
// coordinate size, so that the huge cancellation in reduced combinations of a
// skew basis does not destroy the result (plain doubles lose once the
// reduction ratio passes 2^53)
std::array<double, 3> embed_precise(const CubicFieldCtx& K, const FE& x) {
  size_t bits = 0;
  for (int i = 0; i < 3; ++i) {
    bits = std::max(bits, mpz_sizeinbase(x.c[i].get_num().get_mpz_t(), 2));
    bits = std::max(bits, mpz_sizeinbase(x.c[i].get_den().get_mpz_t(), 2));
  }
  int prec = 96 + (int)bits;
  Embeddings E = K.embeddings(prec);
  std::array<double, 3> out{};
  auto eval_real = [&](const Ival& r) {
    Ival v = ival_exact(x.c[0]) + ival_exact(x.c[1]) * r +
             ival_exact(x.c[2]) * (r * r);
    return Rat((v.lo + v.hi) / 2).get_d();
  };
  if (K.r1 == 3) {
    for (int i = 0; i < 3; ++i) out[i] = eval_real(E.real_roots[i]);
  } else {
    out[0] = eval_real(E.real_roots[0]);
    Ival u = E.u, v = E.v;
    Ival re = ival_exact(x.c[0]) + ival_exact(x.c[1]) * u +
              ival_exact(x.c[2]) * (u * u - v * v);
    Ival im = ival_exact(x.c[1]) * v + ival_exact(x.c[2]) * (u * v + u * v);
    const double s2 = std::sqrt(2.0);
    out[1] = s2 * Rat((re.lo + re.hi) / 2).get_d();
    out[2] = s2 * Rat((im.lo + im.hi) / 2).get_d();
  }
  return out;
}

struct Reduced {
  double B[3][3];  // columns: embedded, LLL-reduced basis
  ZMat U;          // integer transform: reduced_j = sum_i U[i][j] * orig_i
};

// textbook LLL (delta = 0.99) on three embedded columns, tracking U exactly;
// the embedded matrix is recomputed from the exact coordinates after every
// basis change so cancellation in reduced vectors cannot accumulate
Reduced lll3(const CubicFieldCtx& K, const ZMat& basis_cols,
             const double* row_weights = nullptr) {
  Reduced R;
  R.U = identity_mat(3);
  auto reembed = [&] {
    ZMat cur = mat_mul(basis_cols, R.U);
    for (int j = 0; j < 3; ++j) {
      auto e = embed_precise(K, K.from_integral({cur[0][j], cur[1][j],
                                                 cur[2][j]}));
      for (int i = 0; i < 3; ++i)
        R.B[i][j] = row_weights ? e[i] * row_weights[i] : e[i];
    }
  };
  reembed();
  auto col_sub = [&](int dst, int src, const Int& q) {
    for (int i = 0; i < 3; ++i) R.U[i][dst] -= q * R.U[i][src];
    reembed();
  };
  auto col_swap = [&](int a, int b) {
    for (int i = 0; i < 3; ++i) std::swap(R.U[i][a], R.U[i][b]);
    for (int i = 0; i < 3; ++i) std::swap(R.B[i][a], R.B[i][b]);
  };
  // Gram-Schmidt data, recomputed from scratch after every basis change
  // (dimension 3: cheap)
  double mu_[3][3];
  double norm2[3];
  auto gso = [&] {
    double gs[3][3];
    for (int i = 0; i < 3; ++i) {
      for (int j2 = 0; j2 < 3; ++j2) gs[i][j2] = R.B[j2][i];
      for (int j = 0; j < i; ++j) {
        mu_[i][j] = 0;
        if (norm2[j] > 0) {
          double s = 0;
          for (int j2 = 0; j2 < 3; ++j2) s += R.B[j2][i] * gs[j][j2];
          mu_[i][j] = s / norm2[j];
        }
        for (int j2 = 0; j2 < 3; ++j2) gs[i][j2] -= mu_[i][j] * gs[j][j2];
      }
      norm2[i] = 0;
      for (int j2 = 0; j2 < 3; ++j2) norm2[i] += gs[i][j2] * gs[i][j2];
    }
  };
  int k = 1;
  int guard = 0;
  gso();
  while (k < 3 && ++guard < 10000) {
    for (int j = k - 1; j >= 0; --j) {
      if (std::fabs(mu_[k][j]) > 0.5) {
        long q = std::lround(mu_[k][j]);
        col_sub(k, j, Int(q));
        gso();
      }
    }
    if (norm2[k] >= (0.99 - mu_[k][k - 1] * mu_[k][k - 1]) * norm2[k - 1]) {
      ++k;
    } else {
      col_swap(k, k - 1);
      gso();
      k = std::max(1, k - 1);
    }
  }
  return R;
}

}  // namespace

double t2_norm_d(const CubicFieldCtx& K, const FE& x) {
  auto e = embed_d(K, x);
  return e[0] * e[0] + e[1] * e[1] + e[2] * e[2];
}

ZVec short_vector(const CubicFieldCtx& K, const ZMat& basis_cols) {
  Reduced R = lll3(K, basis_cols);
  int best = 0;
  double bn = 1e300;
  for (int j = 0; j < 3; ++j) {
    double n2 = 0;
    for (int i = 0; i < 3; ++i) n2 += R.B[i][j] * R.B[i][j];
    if (n2 < bn) {
      bn = n2;
      best = j;
    }
  }
  ZVec c = {R.U[0][best], R.U[1][best], R.U[2][best]};
  return mat_vec(basis_cols, c);
}

bool enumerate_below(const CubicFieldCtx& K, const ZMat& basis_cols,
                     double bound, const std::function<bool(const ZVec&)>& cb,
                     uint64_t node_budget, const double* row_weights) {
  Reduced R = lll3(K, basis_cols, row_weights);
  // Gram and its Cholesky-style decomposition: T2(c) = sum q_i (c_i + sum_{j>i} mu_ji c_j)^2
  double G[3][3];
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      G[a][b] = 0;
      for (int i = 0; i < 3; ++i) G[a][b] += R.B[i][a] * R.B[i][b];
    }
  double q[3], mu[3][3] = {};
  for (int i = 0; i < 3; ++i) {
    q[i] = G[i][i];
    for (int k = 0; k < i; ++k) q[i] -= q[k] * mu[i][k] * mu[i][k];
    for (int j = i + 1; j < 3; ++j) {
      double s = G[j][i];
      for (int k = 0; k < i; ++k) s -= q[k] * mu[j][k] * mu[i][k];
      mu[j][i] = (q[i] > 0) ? s / q[i] : 0;
    }
  }
  for (int i = 0; i < 3; ++i)
    if (!(q[i] > 0)) throw BoundExceeded("enumerate_below: degenerate Gram");
  const double C = bound * 1.01 + 1e-9;
  uint64_t nodes = 0;
  // c2 outer, then c1, then c0 (indices into the reduced basis)
  double r2 = std::sqrt(C / q[2]);
  for (long c2 = 0; c2 <= (long)std::floor(r2 + 1e-12); ++c2) {
    double t2 = q[2] * (double)c2 * (double)c2;
    if (t2 > C) break;
    double center1 = -mu[2][1] * c2;
    double rad1 = std::sqrt((C - t2) / q[1]);
    for (long c1 = (long)std::ceil(center1 - rad1 - 1e-12);
         c1 <= (long)std::floor(center1 + rad1 + 1e-12); ++c1) {
      double d1 = c1 - center1;
      double t1 = t2 + q[1] * d1 * d1;
      if (t1 > C) continue;
      double center0 = -mu[1][0] * c1 - mu[2][0] * c2;
      double rad0 = std::sqrt((C - t1) / q[0]);
      for (long c0 = (long)std::ceil(center0 - rad0 - 1e-12);
           c0 <= (long)std::floor(center0 + rad0 + 1e-12); ++c0) {
        if (++nodes > node_budget)
          throw BoundExceeded("enumerate_below: node budget exceeded");
        if (c0 == 0 && c1 == 0 && c2 == 0) continue;
        // canonical sign representative: skip the mirror half when c2 = 0
        if (c2 == 0 && (c1 < 0 || (c1 == 0 && c0 < 0))) continue;
        ZVec c = {Int(c0), Int(c1), Int(c2)};
        ZVec red = mat_vec(R.U, c);
        ZVec v = mat_vec(basis_cols, red);
        if (!cb(v)) return false;
      }
    }
  }
  return true;
}

}  // namespace selmer
