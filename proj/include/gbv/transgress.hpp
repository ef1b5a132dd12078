#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "gbv/formal.hpp"
#include "gbv/source_model.hpp"
#include "gbv/symplectic.hpp"

namespace gbv {

// Graded symplectic target with a Hamiltonian Theta of degree n+1 and a
// primitive 1-form for the symplectic structure.  The builders certify
// {Theta, Theta} = 0 and attach the report; a failed certification still
// yields a usable TargetSpec (so that downstream failures can be observed).
struct TargetSpec {
  CoordsPtr coords;
  ConstantSymplectic sp;    // constant symplectic structure, form degree n
  Poly theta;               // degree n+1
  std::vector<Poly> alpha;  // alpha[nu] = coefficient of the nu-th coordinate
                            // differential in the primitive 1-form
  CheckReport certification;

  int form_degree() const { return sp.form_degree(); }
  int dim() const { return sp.form_degree() + 1; }  // matching source dimension
};

// Darboux primitive alpha_nu = 1/2 sum_mu z^mu omega_{mu nu}
std::vector<Poly> darboux_primitive(const ConstantSymplectic& sp);

// x1..xm of degree 0 followed by p1..pm of degree 1
CoordsPtr psm_coords(int m);

// Poisson sigma model target: {x^i, p_j} = delta^i_j with form degree 1,
// Theta = 1/2 pi^{ij}(x) p_i p_j.  pi must be antisymmetric and depend on
// the x coordinates only; certification records the Jacobi identity.
TargetSpec build_psm_target(CoordsPtr coords,
                            const std::vector<std::vector<Poly>>& pi);

// structure constants c[i][j][k] = coefficient of g_k in [g_i, g_j]
struct LieStructure {
  std::vector<std::string> names;
  std::vector<std::vector<std::vector<GRat>>> c;
  int size() const { return int(names.size()); }
};

LieStructure sl2_structure();      // h, e, f
LieStructure so3_structure();      // l1, l2, l3
LieStructure abelian_structure(int m);
// sl2 with one bracket coefficient perturbed, breaking the Jacobi identity
LieStructure broken_sl2_structure();

// ghosts x<g> of degree 1 followed by duals xs<g> of degree d-2
CoordsPtr bf_coords(const std::vector<std::string>& gens, int d);

// BF target in source dimension d: {x^i, xs_j} = delta^i_j with form degree
// d-1, Theta = 1/2 <xs, [x, x]>.  Certification records the Jacobi identity.
TargetSpec build_bf_target(const LieStructure& g, int d);

// Superfield expansion of target expressions over a source model.  Each
// target coordinate is either promoted to a superfield (one field component
// per model basis element, of degree deg(coordinate) - deg(basis)) or kept
// as a parameter that passes through into the field ring unchanged.
class Superfields {
 public:
  Superfields(CoordsPtr target, const SourceModel* model,
              std::vector<bool> is_field, std::vector<Kind> component_kind,
              int trunc = Poly::kNoTrunc);
  // every coordinate a superfield, components of base kind
  Superfields(CoordsPtr target, const SourceModel* model);

  const CoordsPtr& target() const { return target_; }
  const CoordsPtr& fields() const { return fields_; }
  const SourceModel* model() const { return model_; }
  bool is_field(int mu) const { return is_field_.at(mu); }
  int component_index(int mu, int a) const;  // -1 for parameters
  int parameter_index(int mu) const;         // -1 for superfields
  // (target coordinate, basis element) behind a field-ring index;
  // (mu, -1) for the image of a parameter
  std::pair<int, int> origin(int idx) const { return origin_.at(idx); }
  const ModelPoly& superfield(int mu) const { return sf_.at(mu); }

  ModelPoly expand(const Poly& expr) const;
  Poly integrate(const Poly& expr) const;   // model integral of the expansion
  Poly transgress(const Poly& expr) const;  // (-1)^d * integrate

 private:
  CoordsPtr target_;
  const SourceModel* model_;
  std::vector<bool> is_field_;
  int trunc_;
  CoordsPtr fields_;
  std::vector<int> param_idx_;
  std::vector<std::vector<int>> comp_idx_;
  std::vector<std::pair<int, int>> origin_;
  std::vector<ModelPoly> sf_;
};

// Odd symplectic pairing on field components induced by a target form matrix
// (indexed by target coordinates; parameter rows are ignored) and the
// Poincare pairing of the model.  Fails loudly when the result violates the
// degree -1 bracket rules.
ConstantSymplectic transgressed_symplectic(
    const std::vector<std::vector<GRat>>& target_form, const Superfields& sf);

// BV zero-mode theory on the mapping space of a source model into a target
struct FiniteBVTheory {
  CoordsPtr fields;
  std::vector<std::pair<int, int>> field_of;  // field -> (target mu, basis a)
  ConstantSymplectic sp;                      // degree -1
  Poly kinetic, interaction, action;
  CheckReport certification;  // master equation of the transgressed action
};

FiniteBVTheory transgress(const TargetSpec& target, const SourceModel& model);

// Global zero-mode theory over a family of formal Darboux charts: background
// coordinates x^l and odd differentials dx^l are adjoined as parameters, the
// fiber displacement superfield q carries the truncation filtration, and the
// momentum superfield B is coupled through the connection of the exponential
// map.  action = aksz + connection with
//   aksz       = sum_j int B_j D q^j + (-1)^d int Theta(phi_x(q), Jinv B)
//   connection = sum_{l,j} int R^j_l(x, q) B_j dx^l
struct GlobalBVTheory {
  CoordsPtr ring;
  ConstantSymplectic sp;  // degree -1, zero rows on background coordinates
  Poly aksz, connection, action;
  int order = 0;     // fiber truncation
  int base_dim = 0;  // number of background coordinates
  std::vector<int> dx_indices;

  // Chart-level presentation: for a source without differential the action
  // is the superfield integral of integrand_aksz + integrand_connection,
  // and the integral intertwines d_x and the brackets (see the transport
  // test), so master-equation residuals can be computed on the small chart
  // ring and expanded once at the end.
  CoordsPtr chart;
  ConstantSymplectic chart_sp;  // degree n, zero rows on x and dx
  Poly integrand_aksz, integrand_connection;
  std::shared_ptr<const Superfields> expansion;
  std::shared_ptr<const SourceModel> source;  // keeps expansion->model() alive

  Derivation base_differential() const;        // d_x: x^l -> dx^l
  Derivation chart_base_differential() const;  // the same on the chart ring
  GlobalBVTheory without_connection() const;
};

GlobalBVTheory formal_global_action(const TargetSpec& target,
                                    const SourceModel& model,
                                    const FormalExpMap& em, int order);

// Differential master equation d_x S + 1/2 {S, S} = 0, itemized by form
// degree in dx and by fiber order up to order-1.
CheckReport check_dcme(const GlobalBVTheory& th);

}  // namespace gbv
