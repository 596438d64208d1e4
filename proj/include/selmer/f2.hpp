#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace selmer {

// Dense F2 vector of fixed length.
class F2Vec {
 public:
  F2Vec() = default;
  explicit F2Vec(size_t n) : n_(n), w_((n + 63) / 64, 0) {}

  size_t size() const { return n_; }
  bool get(size_t i) const { return (w_[i >> 6] >> (i & 63)) & 1; }
  void set(size_t i, bool b) {
    uint64_t m = uint64_t(1) << (i & 63);
    if (b)
      w_[i >> 6] |= m;
    else
      w_[i >> 6] &= ~m;
  }
  void flip(size_t i) { w_[i >> 6] ^= uint64_t(1) << (i & 63); }

  F2Vec& operator^=(const F2Vec& o) {
    for (size_t i = 0; i < w_.size(); ++i) w_[i] ^= o.w_[i];
    return *this;
  }
  friend F2Vec operator^(F2Vec a, const F2Vec& b) { return a ^= b; }

  bool is_zero() const {
    for (uint64_t w : w_)
      if (w) return false;
    return true;
  }
  bool operator==(const F2Vec& o) const { return n_ == o.n_ && w_ == o.w_; }

  // index of lowest set bit, or size() if zero
  size_t lowest() const {
    for (size_t i = 0; i < w_.size(); ++i)
      if (w_[i]) return (i << 6) + __builtin_ctzll(w_[i]);
    return n_;
  }
  int weight() const {
    int c = 0;
    for (uint64_t w : w_) c += __builtin_popcountll(w);
    return c;
  }

  // concatenate
  F2Vec append(const F2Vec& o) const {
    F2Vec r(n_ + o.n_);
    for (size_t i = 0; i < n_; ++i) r.set(i, get(i));
    for (size_t i = 0; i < o.n_; ++i) r.set(n_ + i, o.get(i));
    return r;
  }

  std::string to_string() const {
    std::string s(n_, '0');
    for (size_t i = 0; i < n_; ++i)
      if (get(i)) s[i] = '1';
    return s;
  }
  static F2Vec from_string(const std::string& s) {
    F2Vec v(s.size());
    for (size_t i = 0; i < s.size(); ++i)
      if (s[i] == '1') v.set(i, true);
    return v;
  }

 private:
  size_t n_ = 0;
  std::vector<uint64_t> w_;
};

// Row space with incremental reduction; pivot = lowest set bit.
class F2Span {
 public:
  explicit F2Span(size_t width) : width_(width) {}

  size_t width() const { return width_; }
  size_t dim() const { return rows_.size(); }

  // Reduce v against the span; returns the residue.
  F2Vec reduce(F2Vec v) const {
    for (const auto& r : rows_) {
      size_t p = r.lowest();
      if (p < v.size() && v.get(p)) v ^= r;
    }
    return v;
  }
  bool contains(const F2Vec& v) const { return reduce(v).is_zero(); }

  // Adds v if independent; true if dimension grew.
  bool add(const F2Vec& v) {
    F2Vec r = reduce(v);
    if (r.is_zero()) return false;
    rows_.push_back(r);
    // keep rows ordered by pivot for determinism
    for (size_t i = rows_.size(); i > 1 && rows_[i - 2].lowest() > rows_[i - 1].lowest(); --i)
      std::swap(rows_[i - 2], rows_[i - 1]);
    return true;
  }

  const std::vector<F2Vec>& rows() const { return rows_; }

 private:
  size_t width_;
  std::vector<F2Vec> rows_;
};

// Solve/kernels for small dense systems.
struct F2Matrix {
  size_t ncols = 0;
  std::vector<F2Vec> rows;

  explicit F2Matrix(size_t cols) : ncols(cols) {}
  void add_row(const F2Vec& r) { rows.push_back(r); }

  size_t rank() const;
  // Basis of {x : M x = 0}, x of length ncols.
  std::vector<F2Vec> kernel() const;
};

// Given images img[i] (all same width) of basis vectors e_i, return a basis
// (as coordinate vectors of length n) of {c : sum c_i img[i] in span}.
std::vector<F2Vec> preimage_basis(const std::vector<F2Vec>& img,
                                  const F2Span& span);

}  // namespace selmer
