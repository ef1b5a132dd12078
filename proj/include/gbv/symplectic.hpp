#pragma once

#include <tuple>
#include <vector>

#include "gbv/derivation.hpp"
#include "gbv/poly.hpp"
#include "gbv/report.hpp"

namespace gbv {

// Constant graded symplectic structure of form degree n on a coordinate
// system.  Stored as the bracket matrix b[mu][nu] = {z^mu, z^nu}, constant
// and nonzero only when deg(mu) + deg(nu) = n, with graded antisymmetry
//   b[nu][mu] = -(-1)^{p_mu (n+1)} b[mu][nu].
// The Poisson bracket has degree -n:
//   {f,g} = sum (d^R_mu f) b[mu][nu] (d^L_nu g),
//   {f,g} = -(-1)^{(|f|+n)(|g|+n)} {g,f}.
class ConstantSymplectic {
 public:
  // With invertible = false the matrix may have zero rows (spectator
  // coordinates that the bracket ignores); form_matrix() is then unavailable.
  static ConstantSymplectic from_bracket_matrix(
      CoordsPtr cs, int form_degree, std::vector<std::vector<GRat>> b,
      bool invertible = true);

  // Darboux-style input: each entry (p, q, v) declares {p, q} = v; the
  // mirrored entry is filled in by the antisymmetry rule.
  static ConstantSymplectic from_pairs(
      CoordsPtr cs, int form_degree,
      const std::vector<std::tuple<std::string, std::string, GRat>>& pairs);

  const CoordsPtr& coords() const { return cs_; }
  int form_degree() const { return n_; }
  const GRat& bracket_entry(int mu, int nu) const { return b_[mu][nu]; }
  const std::vector<std::vector<GRat>>& bracket_matrix() const { return b_; }
  // omega with sum_r b[mu][r] omega[r][nu] = delta, used for kinetic terms
  const std::vector<std::vector<GRat>>& form_matrix() const;

  Poly poisson_bracket(const Poly& f, const Poly& g) const;
  // X_f with X_f(g) = {f,g}; parity p_f + n, degree |f| - n when homogeneous
  Derivation hamiltonian_vf(const Poly& f) const;

  // odd Laplacian (n odd): D f = 1/2 sum (-1)^{p_mu} b[mu][nu] d^L_mu d^L_nu f
  Poly laplacian(const Poly& f) const;

 private:
  ConstantSymplectic() {}

  CoordsPtr cs_;
  int n_ = 0;
  std::vector<std::vector<GRat>> b_, omega_;
};

// Exact inverse of a square GRat matrix by Gauss-Jordan elimination.
std::vector<std::vector<GRat>> invert_matrix(
    const std::vector<std::vector<GRat>>& m);

// Residual of the classical master equation {s,s} = 0.
CheckReport check_master_equation(const ConstantSymplectic& sp, const Poly& s,
                                  const std::string& name = "cme");

// Residual of {s,s} - 2*i*hbar*D s = 0, reported per hbar order.
CheckReport check_quantum_master_equation(const ConstantSymplectic& sp,
                                          const Poly& s,
                                          const std::string& name = "qme");

}  // namespace gbv
