#pragma once

#include <map>
#include <string>
#include <vector>

#include "gbv/derivation.hpp"
#include "gbv/report.hpp"
#include "gbv/source_model.hpp"
#include "gbv/symplectic.hpp"
#include "gbv/transgress.hpp"

namespace gbv {

// Finite homotopy Lie algebra presented by bracket tables in the classical
// convention: each l_j is graded antisymmetric of intrinsic degree 2 - j.
// Tables are stored on ascending index tuples only; values on other orderings
// follow from antisymmetry.  The dual picture is a degree +1 vector field Q
// on the shifted coordinate ring (deg xi^i = deg e_i + 1); the homotopy
// Jacobi identities hold iff [Q, Q] = 0, which is how certify_jacobi works.
class LinftyAlgebra {
 public:
  LinftyAlgebra(std::vector<std::string> names, std::vector<int> degrees,
                int max_arity = 6);

  int size() const { return int(names_.size()); }
  const std::string& name(int i) const { return names_.at(i); }
  int degree(int i) const { return degrees_.at(i); }
  int max_arity() const { return max_arity_; }
  int top_arity() const;  // highest arity with a nonzero entry

  // accumulate l_j(e_{args}) += c e_out; args in any order
  void add_bracket(const std::vector<int>& args, int out, const GRat& c);
  GRat bracket(const std::vector<int>& args, int out) const;
  // l_j on basis arguments, as coefficients over the basis
  std::vector<GRat> apply(const std::vector<int>& args) const;

  void set_pairing(std::vector<std::vector<GRat>> p);
  bool has_pairing() const { return !pairing_.empty(); }
  const std::vector<std::vector<GRat>>& pairing() const { return pairing_; }
  // pairs of nonzero pairing entries have a constant degree sum
  int pairing_degree_sum() const;

  // structural checks: entry degrees, antisymmetry bookkeeping, pairing
  // graded symmetry / homogeneity / cyclicity; throws on violation
  void validate() const;

  // dual coordinate ring and vector field
  CoordsPtr shifted_coords() const;
  Derivation to_derivation() const;
  // homotopy Jacobi via the [Q,Q] components, through top_arity() + 1
  CheckReport certify_jacobi() const;

  // sort a tuple to ascending order in place; returns the classical
  // antisymmetry sign, or 0 when the entry must vanish (repeated even
  // argument)
  int normalize(std::vector<int>& args) const;

 private:
  struct Key {
    std::vector<int> args;  // ascending
    bool operator<(const Key& o) const { return args < o.args; }
  };

  std::vector<std::string> names_;
  std::vector<int> degrees_;
  int max_arity_;
  // tables_[j-1]: ascending tuple of length j -> dense output coefficients
  std::vector<std::map<Key, std::vector<GRat>>> tables_;
  std::vector<std::vector<GRat>> pairing_;
};

// Chevalley-Eilenberg picture of a Lie algebra: the coordinate ring on
// degree-1 generators xi^i, the vector field Q = -1/2 f^k_{ij} xi^i xi^j d_k,
// and the dual differential on antisymmetric cochain tables with trivial
// coefficients.  Cochains are maps from strictly increasing index tuples to
// coefficients.
struct CeComplex {
  CoordsPtr coords;
  Derivation q;
  LieStructure f;

  using Cochain = std::map<std::vector<int>, GRat>;
  Cochain d_ce(const Cochain& cochain, int arity) const;
  // dictionary F_{j1..jn} <-> (1/n!) xi^{j1}...xi^{jn} F_{j1..jn}
  Poly cochain_poly(const Cochain& cochain, int arity) const;
};

CeComplex ce_differential(const LieStructure& f);

// Taylor coefficients of a square-zero degree +1 vector field, repackaged as
// classical brackets through the shift signs (decalage).  Throws when Q does
// not square to zero or carries arities beyond max_arity.
LinftyAlgebra extract_linfty(const Derivation& q, int max_arity = 6);

// L-infinity structure on model (x) g: basis e_a (x) X_i with
//   lhat_1(a (x) X) = Da (x) X + (-1)^{deg a} a (x) l_1(X)
//   lhat_n(...) = the sign-decorated product formula (see docs), n >= 2
// and, when g is cyclic, the pairing (-1)^{deg a2 deg X1} P_model(a1,a2) <X1,X2>.
LinftyAlgebra forms_linfty(const SourceModel& model, const LinftyAlgebra& g);

// Lie bracket tables as a degree-0 L-infinity algebra, with the invariant
// trace-of-adjoint pairing attached
LinftyAlgebra lie_linfty(const LieStructure& f);

// Homotopy Maurer-Cartan theory of a cyclic L-infinity algebra: component
// fields psi^alpha of degree 1 - deg(e_alpha), the action
//   S = sum_j 1/(j+1)! <Psi, l_j(Psi,...,Psi)>,
// and the odd constant symplectic structure induced by the pairing.
struct HmcTheory {
  CoordsPtr ring;
  std::vector<Poly> psi;  // generic superfield components
  ConstantSymplectic sp;
  Poly action;
  CheckReport cme;
};

HmcTheory hmc_action(const LinftyAlgebra& g);

// the same action evaluated on arbitrary components over a caller ring
Poly hmc_action_on(const LinftyAlgebra& g, const std::vector<Poly>& psi);
// Maurer-Cartan expression sum_j 1/j! l_j(Psi,..,Psi) as basis coefficients
std::vector<Poly> hmc_mc_expression(const LinftyAlgebra& g,
                                    const std::vector<Poly>& psi);

}  // namespace gbv
