#pragma once

#include <optional>
#include <vector>

#include "gbv/poly.hpp"

namespace gbv {

// A graded derivation of the coordinate ring, X = sum_i comp[i] * d^L_i,
// acting from the left: X(fg) = X(f) g + (-1)^{p_X p_f} f X(g).
// Parity is mandatory; a uniform ghost-degree shift is optional and, when
// present, must match every nonzero component.
class Derivation {
 public:
  Derivation() {}
  Derivation(CoordsPtr cs, int parity, std::vector<Poly> components,
             std::optional<int> degree = std::nullopt);

  static Derivation zero(CoordsPtr cs, int parity,
                         std::optional<int> degree = std::nullopt);

  const CoordsPtr& coords() const { return cs_; }
  int parity() const { return parity_; }
  std::optional<int> degree() const { return degree_; }
  const Poly& component(int i) const { return comp_.at(i); }
  const std::vector<Poly>& components() const { return comp_; }
  bool is_zero() const;

  void set_component(int i, Poly p);

  Poly apply(const Poly& f) const;

  Derivation operator+(const Derivation& o) const;
  Derivation operator-() const;
  Derivation operator*(const Scalar& s) const;

 private:
  CoordsPtr cs_;
  int parity_ = 0;
  std::optional<int> degree_;
  std::vector<Poly> comp_;
};

// Graded commutator [X,Y] = X Y - (-1)^{p_X p_Y} Y X, again a derivation,
// with components X(Y^i) - (-1)^{p_X p_Y} Y(X^i).
Derivation lie_bracket(const Derivation& x, const Derivation& y);

}  // namespace gbv
