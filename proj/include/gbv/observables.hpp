#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gbv/formal.hpp"
#include "gbv/source_model.hpp"
#include "gbv/transgress.hpp"

namespace gbv {

// Trivial Hamiltonian Q-bundle over a graded symplectic base: the total ring
// lists base coordinates first, then fiber coordinates.  theta_m generates
// the base cohomological field, theta_e is the fiber Hamiltonian of degree
// n+1, and the vertical structure field is its fiber Hamiltonian vector
// field.
struct QBundleSpec {
  CoordsPtr coords;
  int base_count = 0;
  ConstantSymplectic base_sp;   // base-block bracket on the total ring
  ConstantSymplectic fiber_sp;  // fiber-block bracket on the total ring
  int fiber_form_degree = 0;    // n
  // omega_N on the fiber block, indexed by fiber position (inverse of the
  // fiber bracket block); used by the transgression
  std::vector<std::vector<GRat>> fiber_form;
  Poly theta_m;             // base Hamiltonian, may be zero
  Poly theta_e;             // degree n+1
  std::vector<Poly> alpha;  // primitive of omega_N, one entry per fiber
                            // coordinate, each depending on fiber coordinates
                            // only
  // expected vertical field, compared against {theta_e,.} when present
  std::optional<Derivation> quoted_v;
  // split shape used by the formal global lift: the first body_count fiber
  // coordinates form an even degree-0 body whose momenta follow in matching
  // order; -1 when the fiber is not split
  int body_count = -1;

  int fiber_count() const { return coords->size() - base_count; }
  int fiber_index(int nu) const { return base_count + nu; }
};

// Exact residual of Q_M(theta_e) + 1/2 {theta_e, theta_e}_N = 0 plus the
// derived-versus-quoted vertical field comparison.  Degree inconsistencies
// throw before any residual is computed.
CheckReport check_hamiltonian_qbundle(const QBundleSpec& spec);

// Base g[1] (+) g*[d-2] with fiber g (+) g*[d-3]:
//   theta_e = <ys,[x,y]> + <xs,y>,   omega_N = <delta ys, delta y>,
//   V = <[x,y], d/dy> + <ad*_x ys, d/dys> + (-1)^d <xs, d/dys>.
QBundleSpec build_bf_wilson_bundle(const LieStructure& g, int d);

// Pair of source models with a degree-0 unital cdga morphism restricting
// the ambient algebra onto the submanifold algebra.  All morphism axioms
// are checked at construction.
struct EmbeddingModel {
  std::shared_ptr<const SourceModel> ambient;
  std::shared_ptr<const SourceModel> sub;
  std::vector<std::vector<GRat>> restriction;  // [ambient basis][sub basis]

  EmbeddingModel(std::shared_ptr<const SourceModel> ambient_in,
                 std::shared_ptr<const SourceModel> sub_in,
                 std::vector<std::vector<GRat>> restriction_in);

  // pushes a form algebra element through the restriction
  ModelPoly restrict_model(const ModelPoly& f) const;
};

// coordinate torus T^k inside T^d: generators t1..tk survive, the rest die
EmbeddingModel torus_embedding(int d, int k);

// Evaluates a polynomial on ModelPoly images (one per coordinate, over a
// common model and field ring); monomial factors multiply in ascending
// coordinate order.
ModelPoly model_substitute(const Poly& f, const SourceModel* model,
                           const std::vector<ModelPoly>& images);

// Auxiliary BV zero-mode theory of fiber-valued superfields over the
// submanifold model, coupled to the ambient theory through the restriction.
// The field ring holds every ambient coordinate first (same order as the
// ambient ring), then the fiber superfield components.
struct AuxiliaryTheory {
  FiniteBVTheory theory;  // fields, fiber-block bracket, auxiliary action
  int ambient_count = 0;
  // [fiber coordinate][sub-model basis] -> field ring index
  std::vector<std::vector<int>> comp_index;
  std::shared_ptr<const SourceModel> sub;
  bool degree_warning = false;  // set when n != k-1
};

// S^N = int alpha_nu(B) D B^nu + (-1)^k int theta_e(i*A, B) with the
// transgressed fiber bracket of degree n-k.
AuxiliaryTheory transgress_auxiliary(const QBundleSpec& spec,
                                     const FiniteBVTheory& ambient,
                                     const EmbeddingModel& emb);

// Residual of {S_amb, S_aux}_amb + 1/2 {S_aux, S_aux}_aux = 0; the ambient
// action and bracket are lifted into the auxiliary ring, whose leading
// coordinates must repeat the ambient ring.
CheckReport check_pre_observable(const FiniteBVTheory& ambient,
                                 const FiniteBVTheory& aux);

// Formal global auxiliary theory over a family of fiber-body charts:
// backgrounds y^l and their odd differentials on the even fiber body,
// displacement superfields q^j carrying the truncation filtration, momentum
// superfields bq_j, ambient coordinates passing through, and the momentum
// coupling to the connection of the fiber exponential map.
struct GlobalAuxiliary {
  CoordsPtr ring;
  ConstantSymplectic aux_sp;      // degree -1, fiber block only
  ConstantSymplectic ambient_sp;  // ambient block lifted into the ring
  Poly s_kin, s_target, s_r;      // aksz part = s_kin + s_target
  Poly s_ambient;                 // ambient action in the global ring
  int body = 0;                   // number of backgrounds
  int ambient_count = 0;
  int order = 0;
  int d = 0, k = 0;
  std::shared_ptr<const FormalExpMap> em;
  std::shared_ptr<const ConnectionOneForm> conn;
  std::shared_ptr<const SourceModel> sub;
  std::shared_ptr<const Superfields> expansion;
  std::vector<int> y_index, dy_index;
  // [body coordinate][sub-model basis] -> ring index
  std::vector<std::vector<int>> q_index, bq_index;

  Derivation base_differential() const;  // d_y: y^l -> dy^l
  Poly aksz() const { return s_kin + s_target; }
  Poly action() const { return s_kin + s_target + s_r; }
};

// Requires a split fiber (body_count >= 0) and an exponential map on the
// body of matching dimension and order.
GlobalAuxiliary build_global_auxiliary(const QBundleSpec& spec,
                                       const FiniteBVTheory& ambient,
                                       const EmbeddingModel& emb,
                                       const FormalExpMap& em);

// Obstruction residual d_y S^aksz + 1/2 {S_R, S_R}, cross-checked against
// the equivalent form {S^aksz, S_R} - S_{d_y R}; the two must agree
// identically.  Residuals are itemized per fiber order.
CheckReport check_global_obstruction(const GlobalAuxiliary& ga);

// Volume-compatibility precondition, then the identity
//   d_y O - (-1)^d i hbar Delta O = 0
// for O the fiber integral of exp((i/hbar) S^global) over the gauge-fixing
// locus {momenta = 0, non-scalar displacement components = 0}.  The scalar
// displacements integrate against the transported density, represented by
// moment symbols m_a whose base differential follows the connection:
// d_l m_a = sum_j a_j m[R^j_l q^{a-e_j}] dy^l (for the linear chart
// R = -id this is -sum_l a_l m_{a-e_l} dy^l).  The residual is itemized
// per exponential order up to the given order.
CheckReport check_dqme(const GlobalAuxiliary& ga, const FormalVolume& vol,
                       int order);

// Integrates the symplectic factor spanned by factor2 over the Lagrangian
// {zero_locus = 0}: Berezin over the remaining odd coordinates, exact
// source shift plus Wick moments over the remaining even ones (constant
// quadratic part required).  The result lives on the complementary ring;
// normalization constants that have no polynomial form are recorded in the
// certification notes.
FiniteBVTheory effective_action(const FiniteBVTheory& theory,
                                const std::vector<int>& factor2,
                                const std::vector<int>& zero_locus);

// Verification ring and data for the vertical-field condition
//   1/2 {V,V}_N + [pi, V]_SN + R /\ V = 0
// with the Schouten bracket realized as the odd bracket pairing target
// displacements q^l with momenta p_l; the connection enters through
// R = R^j_l(q) p_j dx^l.
struct PsmVerticalData {
  CoordsPtr ring;  // q^1..q^m, dx^1..dx^m, p_1..p_m, fiber coordinates
  int dim = 0;
  ConstantSymplectic odd_sp;    // {q^l, p_j} = delta
  ConstantSymplectic fiber_sp;  // fiber Poisson bracket
  Poly pi;                      // 1/2 pi^{ij}(q) p_i p_j
  Poly v;                       // V^j(q, fiber) p_j
  std::vector<std::vector<Poly>> r;  // r[l][j] = R^j_l(q)

  Poly r_realized() const;  // sum R^j_l p_j dy^l
};

// ring plus brackets for an m-dimensional base and the given fiber
// coordinates; fiber_pairs declare the fiber bracket ({a, b} = v entries,
// mirrored by graded antisymmetry) of the stated form degree; r defaults to
// the linear-chart connection -identity
PsmVerticalData make_psm_vertical_data(
    int m, std::vector<GradedCoordinate> fiber, int fiber_form_degree,
    const std::vector<std::tuple<std::string, std::string, GRat>>&
        fiber_pairs);

CheckReport check_psm_vertical_field(const PsmVerticalData& data);

// BV-extended pairing action int <<al, D_{i*A} be + i*B>> computed directly
// from structure constants over the submanifold model; `aux` supplies the
// combined ring and component layout.  Cross-checked against the
// transgression route by the callers.
Poly wilson_surface_action(const LieStructure& g,
                           const FiniteBVTheory& ambient,
                           const AuxiliaryTheory& aux,
                           const EmbeddingModel& emb);

// Pre-observable residual for W at a fixed embedding plus generator checks:
// the ambient cohomological field against (-1)^d (D A + 1/2 [A,A]) and
// (-1)^d (D B + [A,B]), and bilinearity of the curvature around a shifted
// background.  The embedding-family differential is out of scope and noted
// in the report.
CheckReport check_wilson_surface_cme(const LieStructure& g,
                                     const FiniteBVTheory& ambient,
                                     const AuxiliaryTheory& aux,
                                     const EmbeddingModel& emb,
                                     const Poly& w);

}  // namespace gbv
