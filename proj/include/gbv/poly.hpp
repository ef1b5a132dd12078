#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gbv/coords.hpp"
#include "gbv/scalar.hpp"

namespace gbv {

// Exponent vector over a coordinate system, compared in graded-lex order:
// lower total exponent first, ties broken lexicographically with larger
// exponents on earlier coordinates sorting first.
class Monomial {
 public:
  Monomial() {}
  explicit Monomial(int n) : e_(n, 0) {}

  int size() const { return int(e_.size()); }
  int exp(int i) const { return e_[i]; }
  void set_exp(int i, int v);
  int total_exponent() const {
    int t = 0;
    for (auto v : e_) t += v;
    return t;
  }
  bool is_unit() const { return total_exponent() == 0; }

  bool operator==(const Monomial& o) const { return e_ == o.e_; }
  bool operator!=(const Monomial& o) const { return !(*this == o); }
  bool operator<(const Monomial& o) const;

 private:
  std::vector<uint8_t> e_;
};

// Sparse polynomial in a graded-commutative coordinate ring.  Odd
// coordinates square to zero; products and derivatives follow the Koszul
// sign rule.  An optional truncation order bounds the total degree in
// fiber-kind coordinates; arithmetic keeps the minimum truncation of its
// inputs and drops monomials beyond it.
class Poly {
 public:
  static constexpr int kNoTrunc = std::numeric_limits<int>::max();

  Poly() {}  // zero over a not-yet-known system
  explicit Poly(CoordsPtr cs, int trunc = kNoTrunc)
      : cs_(std::move(cs)), trunc_(trunc) {}

  static Poly constant(CoordsPtr cs, Scalar c, int trunc = kNoTrunc);
  static Poly one(CoordsPtr cs) { return constant(std::move(cs), Scalar(1)); }
  static Poly coordinate(CoordsPtr cs, int i, int trunc = kNoTrunc);
  static Poly coordinate(CoordsPtr cs, const std::string& name,
                         int trunc = kNoTrunc);

  const CoordsPtr& coords() const { return cs_; }
  int truncation() const { return trunc_; }
  Poly with_truncation(int order) const;  // re-truncates
  bool is_zero() const { return t_.empty(); }
  int term_count() const { return int(t_.size()); }
  const std::map<Monomial, Scalar>& terms() const { return t_; }

  void add_term(const Monomial& m, const Scalar& c);

  Poly operator-() const;
  Poly& operator+=(const Poly& o);
  Poly& operator-=(const Poly& o);
  Poly operator+(const Poly& o) const {
    Poly r(*this);
    return r += o;
  }
  Poly operator-(const Poly& o) const {
    Poly r(*this);
    return r -= o;
  }
  Poly operator*(const Poly& o) const;
  Poly operator*(const Scalar& s) const;
  Poly& operator*=(const Poly& o) { return *this = *this * o; }
  Poly& operator*=(const Scalar& s) { return *this = *this * s; }
  bool operator==(const Poly& o) const;
  bool operator!=(const Poly& o) const { return !(*this == o); }

  // graded left/right derivative along coordinate i
  Poly left_derive(int i) const;
  Poly left_derive(const std::string& name) const;
  Poly right_derive(int i) const;

  // copy with a tighter truncation order; terms beyond it are dropped and
  // later products prune against the new bound
  Poly truncated(int k) const;

  // monomial bookkeeping relative to the coordinate system
  int monomial_degree(const Monomial& m) const;  // ghost degree
  int monomial_parity(const Monomial& m) const;
  int fiber_degree(const Monomial& m) const;

  // all terms homogeneous of one ghost degree?  (zero counts as any degree)
  std::optional<int> homogeneous_degree() const;
  std::optional<int> parity() const;  // uniform parity, if any
  int max_fiber_degree() const;

  // sub-polynomials
  Poly filter(const std::function<bool(const Monomial&)>& keep) const;
  Poly fiber_component(int k) const;
  Poly hbar_component(int k) const;  // coefficient of hbar^k
  int max_hbar_degree() const;

  Scalar coefficient(const Monomial& m) const;
  Scalar constant_term() const { return coefficient(Monomial(cs_->size())); }

  // simultaneous substitution: coordinate i -> images[i], a polynomial over
  // the target system, homogeneous of degree(i); result truncated at order
  Poly substitute(const std::vector<Poly>& images, CoordsPtr target,
                  int order = kNoTrunc) const;

  std::string monomial_str(const Monomial& m) const;
  std::string str() const;
  // leading (monomial, coefficient) pairs in canonical order
  std::vector<std::pair<std::string, std::string>> leading_terms(
      int max_count) const;

 private:
  void check_compatible(const Poly& o) const;

  CoordsPtr cs_;
  int trunc_ = kNoTrunc;
  std::map<Monomial, Scalar> t_;
};

inline Poly operator*(const Scalar& s, const Poly& p) { return p * s; }

// Iterated Berezin integral over the named odd coordinates; the last name in
// the list is the innermost integral, and each single integral acts as the
// left derivative (integral of the coordinate itself is 1).
Poly berezin_integral(const Poly& f, const std::vector<std::string>& odds);

// Gaussian moment of f under the covariance pairing cov on even coordinates
// (pairs of coordinate indices, symmetric).  Computed by the derivative
// recursion <x_i g> = sum_j cov(i,j) <d_j g>.
Scalar wick_moment(const std::map<std::pair<int, int>, Scalar>& cov,
                   const Poly& f);

}  // namespace gbv
