#include "gbv/derivation.hpp"

namespace gbv {

Derivation::Derivation(CoordsPtr cs, int parity, std::vector<Poly> components,
                       std::optional<int> degree)
    : cs_(std::move(cs)),
      parity_(((parity % 2) + 2) % 2),
      degree_(degree),
      comp_(std::move(components)) {
  if (int(comp_.size()) != cs_->size())
    throw Error("derivation: need one component per coordinate");
  for (int i = 0; i < cs_->size(); ++i) {
    const Poly& c = comp_[i];
    if (c.is_zero()) continue;
    if (!c.coords()->same_as(*cs_))
      throw Error("derivation: component over wrong coordinate system");
    auto p = c.parity();
    if (!p || *p != (parity_ + cs_->parity(i)) % 2)
      throw Error("derivation: component of " + cs_->name(i) +
                  " has wrong parity");
    if (degree_) {
      auto d = c.homogeneous_degree();
      if (!d || *d != *degree_ + cs_->degree(i))
        throw Error("derivation: component of " + cs_->name(i) +
                    " not homogeneous of the declared degree");
    }
  }
}

Derivation Derivation::zero(CoordsPtr cs, int parity,
                            std::optional<int> degree) {
  std::vector<Poly> comp(cs->size(), Poly(cs));
  return Derivation(std::move(cs), parity, std::move(comp), degree);
}

bool Derivation::is_zero() const {
  for (const auto& c : comp_)
    if (!c.is_zero()) return false;
  return true;
}

void Derivation::set_component(int i, Poly p) {
  if (!p.is_zero()) {
    auto pr = p.parity();
    if (!pr || *pr != (parity_ + cs_->parity(i)) % 2)
      throw Error("derivation: component of " + cs_->name(i) +
                  " has wrong parity");
    if (degree_) {
      auto d = p.homogeneous_degree();
      if (!d || *d != *degree_ + cs_->degree(i))
        throw Error("derivation: component of " + cs_->name(i) +
                    " not homogeneous of the declared degree");
    }
  }
  comp_.at(i) = std::move(p);
}

Poly Derivation::apply(const Poly& f) const {
  Poly r(f.coords(), f.truncation());
  for (int i = 0; i < cs_->size(); ++i) {
    if (comp_[i].is_zero()) continue;
    r += comp_[i] * f.left_derive(i);
  }
  return r;
}

Derivation Derivation::operator+(const Derivation& o) const {
  if (parity_ != o.parity_) throw Error("derivation sum: parity mismatch");
  std::vector<Poly> comp(comp_.size());
  for (size_t i = 0; i < comp_.size(); ++i) comp[i] = comp_[i] + o.comp_[i];
  std::optional<int> deg =
      (degree_ && o.degree_ && *degree_ == *o.degree_) ? degree_ : std::nullopt;
  return Derivation(cs_, parity_, std::move(comp), deg);
}

Derivation Derivation::operator-() const {
  std::vector<Poly> comp(comp_.size());
  for (size_t i = 0; i < comp_.size(); ++i) comp[i] = -comp_[i];
  return Derivation(cs_, parity_, std::move(comp), degree_);
}

Derivation Derivation::operator*(const Scalar& s) const {
  std::vector<Poly> comp(comp_.size());
  for (size_t i = 0; i < comp_.size(); ++i) comp[i] = comp_[i] * s;
  return Derivation(cs_, parity_, std::move(comp), degree_);
}

Derivation lie_bracket(const Derivation& x, const Derivation& y) {
  if (!x.coords()->same_as(*y.coords()))
    throw Error("lie_bracket: coordinate system mismatch");
  int sign = (x.parity() * y.parity()) & 1;
  std::vector<Poly> comp(x.coords()->size());
  for (int i = 0; i < x.coords()->size(); ++i) {
    Poly t = x.apply(y.component(i));
    Poly u = y.apply(x.component(i));
    comp[i] = sign ? t + u : t - u;
  }
  std::optional<int> deg;
  if (x.degree() && y.degree()) deg = *x.degree() + *y.degree();
  return Derivation(x.coords(), (x.parity() + y.parity()) % 2, std::move(comp),
                    deg);
}

}  // namespace gbv
