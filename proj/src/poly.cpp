#include "gbv/poly.hpp"

#include <algorithm>

namespace gbv {

void Monomial::set_exp(int i, int v) {
  if (v < 0 || v > 255) throw Error("monomial exponent out of range");
  e_[i] = uint8_t(v);
}

bool Monomial::operator<(const Monomial& o) const {
  int ta = total_exponent(), tb = o.total_exponent();
  if (ta != tb) return ta < tb;
  for (size_t i = 0; i < e_.size(); ++i) {
    if (e_[i] != o.e_[i]) return e_[i] > o.e_[i];
  }
  return false;
}

Poly Poly::constant(CoordsPtr cs, Scalar c, int trunc) {
  Poly p(std::move(cs), trunc);
  if (!c.is_zero()) p.t_.emplace(Monomial(p.cs_->size()), std::move(c));
  return p;
}

Poly Poly::coordinate(CoordsPtr cs, int i, int trunc) {
  Poly p(std::move(cs), trunc);
  Monomial m(p.cs_->size());
  m.set_exp(i, 1);
  if (p.fiber_degree(m) <= trunc) p.t_.emplace(std::move(m), Scalar(1));
  return p;
}

Poly Poly::coordinate(CoordsPtr cs, const std::string& name, int trunc) {
  int i = cs->index(name);
  return coordinate(std::move(cs), i, trunc);
}

Poly Poly::with_truncation(int order) const {
  Poly r(cs_, order);
  for (const auto& [m, c] : t_)
    if (fiber_degree(m) <= order) r.t_.emplace(m, c);
  return r;
}

void Poly::add_term(const Monomial& m, const Scalar& c) {
  if (c.is_zero()) return;
  for (int i = 0; i < cs_->size(); ++i)
    if (cs_->odd(i) && m.exp(i) > 1)
      throw Error("odd coordinate " + cs_->name(i) + " squared");
  if (fiber_degree(m) > trunc_) return;
  auto [it, fresh] = t_.emplace(m, c);
  if (!fresh) {
    it->second += c;
    if (it->second.is_zero()) t_.erase(it);
  }
}

void Poly::check_compatible(const Poly& o) const {
  if (!cs_ || !o.cs_) return;
  if (!cs_->same_as(*o.cs_)) throw Error("coordinate system mismatch");
}

Poly Poly::operator-() const {
  Poly r(cs_, trunc_);
  for (const auto& [m, c] : t_) r.t_.emplace(m, -c);
  return r;
}

Poly& Poly::operator+=(const Poly& o) {
  check_compatible(o);
  if (!cs_) return *this = o;
  int tr = std::min(trunc_, o.trunc_);
  if (tr < trunc_) *this = with_truncation(tr);
  for (const auto& [m, c] : o.t_) {
    if (fiber_degree(m) > trunc_) continue;
    auto [it, fresh] = t_.emplace(m, c);
    if (!fresh) {
      it->second += c;
      if (it->second.is_zero()) t_.erase(it);
    }
  }
  return *this;
}

Poly& Poly::operator-=(const Poly& o) { return *this += -o; }

Poly Poly::operator*(const Poly& o) const {
  check_compatible(o);
  if (!cs_) return *this;
  if (!o.cs_) return o;
  const CoordinateSystem& cs = *cs_;
  int n = cs.size();
  Poly r(cs_, std::min(trunc_, o.trunc_));
  for (const auto& [ma, ca] : t_) {
    int fa = fiber_degree(ma);
    for (const auto& [mb, cb] : o.t_) {
      if (fa + fiber_degree(mb) > r.trunc_) continue;
      // canonical product with Koszul sign; zero on a shared odd coordinate
      Monomial m = ma;
      int swaps = 0, odd_above = 0;
      bool dead = false;
      for (int i = n - 1; i >= 0; --i) {
        bool oi = cs.odd(i);
        int be = mb.exp(i);
        if (be) {
          if (oi) {
            if (ma.exp(i)) {
              dead = true;
              break;
            }
            swaps += odd_above;
          }
          m.set_exp(i, m.exp(i) + be);
        }
        if (oi && ma.exp(i)) odd_above += 1;
      }
      if (dead) continue;
      Scalar c = ca * cb;
      if (swaps & 1) c = -c;
      if (c.is_zero()) continue;
      auto it = r.t_.find(m);
      if (it == r.t_.end()) {
        r.t_.emplace(std::move(m), std::move(c));
      } else {
        it->second += c;
        if (it->second.is_zero()) r.t_.erase(it);
      }
    }
  }
  return r;
}

Poly Poly::operator*(const Scalar& s) const {
  Poly r(cs_, trunc_);
  if (s.is_zero()) return r;
  for (const auto& [m, c] : t_) {
    Scalar cc = c * s;
    if (!cc.is_zero()) r.t_.emplace(m, std::move(cc));
  }
  return r;
}

bool Poly::operator==(const Poly& o) const {
  check_compatible(o);
  return t_ == o.t_;
}

Poly Poly::left_derive(int i) const {
  const CoordinateSystem& cs = *cs_;
  Poly r(cs_, trunc_);
  bool oi = cs.odd(i);
  for (const auto& [m, c] : t_) {
    int e = m.exp(i);
    if (!e) continue;
    Monomial d = m;
    d.set_exp(i, e - 1);
    Scalar cc = c;
    if (oi) {
      int before = 0;
      for (int j = 0; j < i; ++j)
        if (cs.odd(j)) before += m.exp(j);
      if (before & 1) cc = -cc;
    } else {
      cc = cc * Scalar(e);
    }
    r.t_.emplace(std::move(d), std::move(cc));
  }
  return r;
}

Poly Poly::left_derive(const std::string& name) const {
  return left_derive(cs_->index(name));
}

Poly Poly::truncated(int k) const {
  Poly r(cs_, std::min(k, trunc_));
  if (!cs_) return r;
  for (const auto& [m, c] : t_)
    if (fiber_degree(m) <= r.trunc_) r.t_.emplace(m, c);
  return r;
}

Poly Poly::right_derive(int i) const {
  const CoordinateSystem& cs = *cs_;
  if (!cs.odd(i)) return left_derive(i);
  Poly r(cs_, trunc_);
  for (const auto& [m, c] : t_) {
    int e = m.exp(i);
    if (!e) continue;
    Monomial d = m;
    d.set_exp(i, e - 1);
    // right derivative of a monomial: (-1)^{p_i (p_m + 1)} left derivative
    Scalar cc = c;
    int before = 0;
    for (int j = 0; j < i; ++j)
      if (cs.odd(j)) before += m.exp(j);
    int sign = (before + monomial_parity(m) + 1) & 1;
    if (sign) cc = -cc;
    r.t_.emplace(std::move(d), std::move(cc));
  }
  return r;
}

int Poly::monomial_degree(const Monomial& m) const {
  int d = 0;
  for (int i = 0; i < cs_->size(); ++i) d += m.exp(i) * cs_->degree(i);
  return d;
}

int Poly::monomial_parity(const Monomial& m) const {
  return ((monomial_degree(m) % 2) + 2) % 2;
}

int Poly::fiber_degree(const Monomial& m) const {
  int d = 0;
  for (int i = 0; i < cs_->size(); ++i)
    if (cs_->kind(i) == Kind::fiber) d += m.exp(i);
  return d;
}

std::optional<int> Poly::homogeneous_degree() const {
  std::optional<int> d;
  for (const auto& [m, c] : t_) {
    int md = monomial_degree(m);
    if (!d)
      d = md;
    else if (*d != md)
      return std::nullopt;
  }
  return d ? d : std::optional<int>(0);
}

std::optional<int> Poly::parity() const {
  std::optional<int> p;
  for (const auto& [m, c] : t_) {
    int mp = monomial_parity(m);
    if (!p)
      p = mp;
    else if (*p != mp)
      return std::nullopt;
  }
  return p ? p : std::optional<int>(0);
}

int Poly::max_fiber_degree() const {
  int d = 0;
  for (const auto& [m, c] : t_) d = std::max(d, fiber_degree(m));
  return d;
}

Poly Poly::filter(const std::function<bool(const Monomial&)>& keep) const {
  Poly r(cs_, trunc_);
  for (const auto& [m, c] : t_)
    if (keep(m)) r.t_.emplace(m, c);
  return r;
}

Poly Poly::fiber_component(int k) const {
  return filter([&](const Monomial& m) { return fiber_degree(m) == k; });
}

Poly Poly::hbar_component(int k) const {
  Poly r(cs_, trunc_);
  for (const auto& [m, c] : t_) {
    Scalar ck = c.hbar_coefficient(k);
    if (!ck.is_zero()) r.t_.emplace(m, std::move(ck));
  }
  return r;
}

int Poly::max_hbar_degree() const {
  int d = 0;
  for (const auto& [m, c] : t_) d = std::max(d, c.hbar_degree());
  return d;
}

Scalar Poly::coefficient(const Monomial& m) const {
  auto it = t_.find(m);
  return it == t_.end() ? Scalar() : it->second;
}

Poly Poly::substitute(const std::vector<Poly>& images, CoordsPtr target,
                      int order) const {
  if (!cs_) return Poly(std::move(target), order);
  if (int(images.size()) != cs_->size())
    throw Error("substitute: need one image per coordinate");
  for (int i = 0; i < cs_->size(); ++i) {
    if (images[i].cs_ && !images[i].cs_->same_as(*target))
      throw Error("substitute: image over wrong coordinate system");
    for (const auto& [m, c] : images[i].t_) {
      if (images[i].monomial_degree(m) != cs_->degree(i))
        throw Error("substitute: image of " + cs_->name(i) +
                    " not homogeneous of degree " +
                    std::to_string(cs_->degree(i)));
    }
  }
  Poly result(target, order);
  for (const auto& [m, c] : t_) {
    Poly acc = Poly::constant(target, c, order);
    for (int i = 0; i < cs_->size() && !acc.is_zero(); ++i)
      for (int k = 0; k < m.exp(i) && !acc.is_zero(); ++k)
        acc = acc * images[i];
    result += acc;
  }
  return result;
}

std::string Poly::monomial_str(const Monomial& m) const {
  std::string s;
  for (int i = 0; i < cs_->size(); ++i) {
    int e = m.exp(i);
    if (!e) continue;
    if (!s.empty()) s += "*";
    s += cs_->name(i);
    if (e > 1) s += "^" + std::to_string(e);
  }
  return s.empty() ? "1" : s;
}

namespace {

bool composite_coeff(const std::string& s) {
  if (s.find('+') != std::string::npos) return true;
  if (s.find('-', 1) != std::string::npos) return true;
  return false;
}

}  // namespace

std::string Poly::str() const {
  if (t_.empty()) return "0";
  std::string s;
  for (const auto& [m, c] : t_) {
    std::string cs = c.str();
    std::string term;
    if (m.is_unit()) {
      term = cs;
    } else {
      std::string ms = monomial_str(m);
      if (cs == "1")
        term = ms;
      else if (cs == "-1")
        term = "-" + ms;
      else
        term = (composite_coeff(cs) ? "(" + cs + ")" : cs) + "*" + ms;
    }
    if (s.empty())
      s = term;
    else if (!term.empty() && term[0] == '-')
      s += term;
    else
      s += "+" + term;
  }
  return s;
}

std::vector<std::pair<std::string, std::string>> Poly::leading_terms(
    int max_count) const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [m, c] : t_) {
    if (int(out.size()) >= max_count) break;
    out.emplace_back(monomial_str(m), c.str());
  }
  return out;
}

Poly berezin_integral(const Poly& f, const std::vector<std::string>& odds) {
  Poly r = f;
  const CoordsPtr& cs = f.coords();
  for (auto it = odds.rbegin(); it != odds.rend(); ++it) {
    int i = cs->index(*it);
    if (!cs->odd(i)) throw Error("berezin_integral: " + *it + " is not odd");
    r = r.left_derive(i);
  }
  return r;
}

namespace {

Scalar wick_mono(const std::map<std::pair<int, int>, Scalar>& cov,
                 std::vector<int>& e) {
  int first = -1;
  for (size_t i = 0; i < e.size(); ++i)
    if (e[i]) {
      first = int(i);
      break;
    }
  if (first < 0) return Scalar(1);
  e[first] -= 1;
  Scalar total;
  for (size_t j = 0; j < e.size(); ++j) {
    if (!e[j]) continue;
    auto it = cov.find({first, int(j)});
    if (it == cov.end()) it = cov.find({int(j), first});
    if (it == cov.end() || it->second.is_zero()) continue;
    Scalar mult = it->second * Scalar(e[j]);
    e[j] -= 1;
    total += mult * wick_mono(cov, e);
    e[j] += 1;
  }
  e[first] += 1;
  return total;
}

}  // namespace

Scalar wick_moment(const std::map<std::pair<int, int>, Scalar>& cov,
                   const Poly& f) {
  const CoordsPtr& cs = f.coords();
  for (const auto& [ij, c] : cov) {
    if (cs->odd(ij.first) || cs->odd(ij.second))
      throw Error("wick_moment: covariance on an odd coordinate");
  }
  Scalar total;
  for (const auto& [m, c] : f.terms()) {
    if (m.total_exponent() & 1) continue;
    std::vector<int> e(cs->size());
    bool bad = false;
    for (int i = 0; i < cs->size(); ++i) {
      e[i] = m.exp(i);
      if (e[i] && cs->odd(i)) bad = true;
    }
    if (bad) throw Error("wick_moment: odd coordinate in moment");
    total += c * wick_mono(cov, e);
  }
  return total;
}

}  // namespace gbv
