#pragma once

#include <gmpxx.h>

#include <string>
#include <vector>

namespace gbv {

// Exact Gaussian rational a + b*i.
struct GRat {
  mpq_class re, im;

  GRat() : re(0), im(0) {}
  GRat(long v) : re(v), im(0) {}
  GRat(long num, long den) : re(num, den), im(0) { re.canonicalize(); }
  GRat(mpq_class r) : re(std::move(r)), im(0) {}
  GRat(mpq_class r, mpq_class i) : re(std::move(r)), im(std::move(i)) {}

  static GRat i() { return GRat(mpq_class(0), mpq_class(1)); }

  bool is_zero() const { return re == 0 && im == 0; }
  bool is_real() const { return im == 0; }

  GRat operator-() const { return GRat(-re, -im); }
  GRat& operator+=(const GRat& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  GRat& operator-=(const GRat& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  GRat operator+(const GRat& o) const {
    GRat r(*this);
    return r += o;
  }
  GRat operator-(const GRat& o) const {
    GRat r(*this);
    return r -= o;
  }
  GRat operator*(const GRat& o) const {
    return GRat(re * o.re - im * o.im, re * o.im + im * o.re);
  }
  GRat& operator*=(const GRat& o) { return *this = *this * o; }
  GRat operator/(const GRat& o) const;
  bool operator==(const GRat& o) const { return re == o.re && im == o.im; }
  bool operator!=(const GRat& o) const { return !(*this == o); }

  std::string str() const;
};

// Polynomial in the formal central symbol hbar (degree 0) with GRat
// coefficients.  This is the exact scalar type of the whole symbolic layer.
class Scalar {
 public:
  Scalar() {}
  Scalar(long v) { set0(GRat(v)); }
  Scalar(long num, long den) { set0(GRat(num, den)); }
  Scalar(mpq_class q) { set0(GRat(std::move(q))); }
  Scalar(GRat g) { set0(std::move(g)); }

  static Scalar i() { return Scalar(GRat::i()); }
  static Scalar hbar(int power = 1) {
    Scalar s;
    s.c_.assign(power + 1, GRat());
    s.c_[power] = GRat(1);
    return s;
  }

  bool is_zero() const { return c_.empty(); }
  // true when the scalar carries no hbar dependence
  bool is_constant() const { return c_.size() <= 1; }
  int hbar_degree() const { return c_.empty() ? -1 : int(c_.size()) - 1; }
  GRat coeff(int k) const {
    return (k >= 0 && k < int(c_.size())) ? c_[k] : GRat();
  }
  GRat constant_part() const { return coeff(0); }

  Scalar operator-() const;
  Scalar& operator+=(const Scalar& o);
  Scalar& operator-=(const Scalar& o);
  Scalar operator+(const Scalar& o) const {
    Scalar r(*this);
    return r += o;
  }
  Scalar operator-(const Scalar& o) const {
    Scalar r(*this);
    return r -= o;
  }
  Scalar operator*(const Scalar& o) const;
  Scalar& operator*=(const Scalar& o) { return *this = *this * o; }
  // division by an hbar-free scalar only
  Scalar operator/(const GRat& g) const;
  bool operator==(const Scalar& o) const { return c_ == o.c_; }
  bool operator!=(const Scalar& o) const { return !(*this == o); }

  // coefficient of hbar^k as a plain scalar
  Scalar hbar_coefficient(int k) const {
    return (k >= 0 && k < int(c_.size())) ? Scalar(c_[k]) : Scalar();
  }

  std::string str() const;

 private:
  void set0(GRat g) {
    if (!g.is_zero()) c_.push_back(std::move(g));
  }
  void normalize() {
    while (!c_.empty() && c_.back().is_zero()) c_.pop_back();
  }
  std::vector<GRat> c_;  // c_[k] * hbar^k
};

}  // namespace gbv
