#pragma once

#include <utility>
#include <vector>

#include "gbv/derivation.hpp"
#include "gbv/report.hpp"
#include "gbv/rng.hpp"
#include "gbv/symplectic.hpp"

namespace gbv {

// Coordinate layout for formal-neighborhood computations on an m-dimensional
// base: x^1..x^m (even base), optional even parameters (e.g. a family time),
// odd one-form generators dx^1..dx^m, and fiber coordinates p^1..p^m that
// carry the truncation filtration.
struct FormalContext {
  int dim = 0;
  std::vector<std::string> params;
  CoordsPtr cs;

  static FormalContext make(int dim, std::vector<std::string> params = {});

  int x_index(int l) const { return l; }
  int param_index(int k) const { return dim + k; }
  int dx_index(int l) const { return dim + int(params.size()) + l; }
  int p_index(int j) const { return 2 * dim + int(params.size()) + j; }

  Poly x(int l, int order = Poly::kNoTrunc) const {
    return Poly::coordinate(cs, x_index(l), order);
  }
  Poly dx(int l, int order = Poly::kNoTrunc) const {
    return Poly::coordinate(cs, dx_index(l), order);
  }
  Poly p(int j, int order = Poly::kNoTrunc) const {
    return Poly::coordinate(cs, p_index(j), order);
  }
  Poly param(const std::string& name, int order = Poly::kNoTrunc) const {
    return Poly::coordinate(cs, name, order);
  }

  // dx-degree and fiber degree of a monomial
  int form_degree(const Monomial& m) const;
  int fiber_degree(const Monomial& m) const;
  bool base_only(const Poly& f) const;  // no p, no dx dependence
};

// One coefficient of a formal exponential map: the arity-|lower| tensor
// entry phi^i_{lower}, a polynomial in the base coordinates.  Lower indices
// are symmetrized by sorting; listing the same sorted tuple twice is an
// error.
struct ExpCoeff {
  int i = 0;
  std::vector<int> lower;
  Poly c;
};

// phi^i_x(p) = x^i + p^i + sum_{k>=2} (1/k!) phi^i_{j1..jk}(x) p^{j1}..p^{jk}
// built from symmetric coefficient tensors of arity 2..N.  The map itself is
// an exact polynomial; the order N bounds the fiber filtration of everything
// derived from it.
class FormalExpMap {
 public:
  FormalExpMap(FormalContext ctx, int order,
               const std::vector<ExpCoeff>& coeffs);

  static FormalExpMap identity(FormalContext ctx, int order) {
    return FormalExpMap(std::move(ctx), order, {});
  }

  const FormalContext& ctx() const { return ctx_; }
  int order() const { return order_; }
  const Poly& phi(int i) const { return phi_.at(i); }

  std::vector<std::vector<Poly>> fiber_jacobian() const;          // J[i][j]
  std::vector<std::vector<Poly>> inverse_fiber_jacobian() const;  // to order N

  // derivative of phi^i along a parameter coordinate
  Poly derivative_in(const std::string& param, int i) const;

 private:
  FormalContext ctx_;
  int order_;
  std::vector<Poly> phi_;
};

// Seeded random exponential map with arities 2..max_arity and coefficients
// affine in the base coordinates (so that flatness is nontrivial).
FormalExpMap random_exp_map(const FormalContext& ctx, int order, Rng& rng,
                            int max_arity = 3, bool x_dependent = true);

// Inverse of a matrix of the shape identity + (fiber degree >= 1) by the
// geometric series, truncated at the given fiber order.
std::vector<std::vector<Poly>> invert_unipotent_matrix(
    const std::vector<std::vector<Poly>>& m, int order);

Poly poly_det(const std::vector<std::vector<Poly>>& m);

// Connection one-form R^j_l(x,p) with R^j_l(x,0) = -delta^j_l; stores the
// component matrix and exposes the odd derivation sum_l dx^l R^j_l d/dp^j.
class ConnectionOneForm {
 public:
  ConnectionOneForm(FormalContext ctx, int order,
                    std::vector<std::vector<Poly>> comp);

  // R^j_l = -(d phi^k / d x^l) (J^{-1})^j_k
  static ConnectionOneForm from_exp_map(const FormalExpMap& em);

  const FormalContext& ctx() const { return ctx_; }
  int order() const { return order_; }
  const Poly& component(int l, int j) const { return comp_.at(l).at(j); }
  Derivation as_derivation() const;
  Derivation direction(int l) const;  // even field R^j_l d/dp^j at fixed l

 private:
  FormalContext ctx_;
  int order_;
  std::vector<std::vector<Poly>> comp_;  // comp[l][j] = R^j_l
};

// d = sum_l dx^l d/dx^l over the x-directions only
Derivation de_rham(const FormalContext& ctx);

// f(phi_x(p)) for f a polynomial in the base coordinates alone
Poly taylor_pullback(const FormalExpMap& em, const Poly& f);

// d_x R + 1/2 [R,R] = 0 to fiber order N-1
CheckReport check_flatness(const ConnectionOneForm& r);

// (d_x + L_R) taylor_pullback(em, f) = 0 to order N-1
CheckReport check_d_closed(const ConnectionOneForm& r, const FormalExpMap& em,
                           const Poly& f);
// same residual for an explicitly supplied section
CheckReport check_d_closed_section(const ConnectionOneForm& r,
                                   const Poly& sigma);

// (delta delta* + delta* delta) sigma = (r+s) sigma for sigma of homogeneous
// form degree r and fiber degree s; inhomogeneous input is rejected
CheckReport homotopy_identity(const FormalContext& ctx, const Poly& sigma);

// Generator C^j = -(J^{-1})^j_k dphi^k/dt of a polynomial family, plus a
// report verifying dR/dt = d_x C + [R,C] to order N-1 and, for
// sigma = taylor_pullback(em, f), dsigma/dt = -L_C sigma.
std::pair<Derivation, CheckReport> family_generator(const FormalExpMap& em,
                                                    const std::string& param,
                                                    const Poly& f);

// Density rho(x,p) with invertible leading part, rho * coordinate volume.
struct FormalVolume {
  Poly rho;
  int order = 0;
  FormalVolume(Poly r, int n);
};

// det(d phi / d p): the coordinate volume transported by the map
FormalVolume pullback_volume(const FormalExpMap& em);

// per base direction l:  d_l rho + R_l(rho) + rho * div(R_l) = 0 to N-1
CheckReport check_volume_compatibility(const ConnectionOneForm& r,
                                       const FormalVolume& vol);

}  // namespace gbv
