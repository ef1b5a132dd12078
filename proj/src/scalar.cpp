#include "gbv/scalar.hpp"

#include <stdexcept>

namespace gbv {

GRat GRat::operator/(const GRat& o) const {
  if (o.is_zero()) throw std::domain_error("GRat: division by zero");
  mpq_class n = o.re * o.re + o.im * o.im;
  return GRat((re * o.re + im * o.im) / n, (im * o.re - re * o.im) / n);
}

namespace {

std::string q_str(const mpq_class& q) { return q.get_str(); }

}  // namespace

std::string GRat::str() const {
  if (is_zero()) return "0";
  if (im == 0) return q_str(re);
  std::string istr;
  if (im == 1)
    istr = "i";
  else if (im == -1)
    istr = "-i";
  else
    istr = q_str(im) + "*i";
  if (re == 0) return istr;
  std::string s = q_str(re);
  if (im > 0)
    s += "+" + istr;
  else
    s += istr;  // istr already carries the minus sign
  return s;
}

Scalar Scalar::operator-() const {
  Scalar r(*this);
  for (auto& g : r.c_) g = -g;
  return r;
}

Scalar& Scalar::operator+=(const Scalar& o) {
  if (c_.size() < o.c_.size()) c_.resize(o.c_.size());
  for (size_t k = 0; k < o.c_.size(); ++k) c_[k] += o.c_[k];
  normalize();
  return *this;
}

Scalar& Scalar::operator-=(const Scalar& o) {
  if (c_.size() < o.c_.size()) c_.resize(o.c_.size());
  for (size_t k = 0; k < o.c_.size(); ++k) c_[k] -= o.c_[k];
  normalize();
  return *this;
}

Scalar Scalar::operator*(const Scalar& o) const {
  Scalar r;
  if (c_.empty() || o.c_.empty()) return r;
  r.c_.assign(c_.size() + o.c_.size() - 1, GRat());
  for (size_t a = 0; a < c_.size(); ++a) {
    if (c_[a].is_zero()) continue;
    for (size_t b = 0; b < o.c_.size(); ++b) r.c_[a + b] += c_[a] * o.c_[b];
  }
  r.normalize();
  return r;
}

Scalar Scalar::operator/(const GRat& g) const {
  if (g.is_zero()) throw std::domain_error("Scalar: division by zero");
  Scalar r(*this);
  for (auto& c : r.c_) c = c / g;
  return r;
}

std::string Scalar::str() const {
  if (c_.empty()) return "0";
  std::string s;
  bool first = true;
  for (size_t k = 0; k < c_.size(); ++k) {
    if (c_[k].is_zero()) continue;
    std::string cs = c_[k].str();
    bool composite = cs.find('+') != std::string::npos ||
                     cs.find('-', 1) != std::string::npos;
    if (k > 0) {
      std::string h = (k == 1) ? "hbar" : "hbar^" + std::to_string(k);
      if (cs == "1")
        cs = h;
      else if (cs == "-1")
        cs = "-" + h;
      else
        cs = (composite ? "(" + cs + ")" : cs) + "*" + h;
    }
    if (first) {
      s = cs;
      first = false;
    } else {
      if (!cs.empty() && cs[0] == '-')
        s += cs;
      else
        s += "+" + cs;
    }
  }
  return s.empty() ? "0" : s;
}

}  // namespace gbv
