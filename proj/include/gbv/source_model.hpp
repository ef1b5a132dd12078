#pragma once

#include <string>
#include <vector>

#include "gbv/poly.hpp"

namespace gbv {

// Finite graded-commutative dg algebra with an integration functional: the
// zero-mode stand-in for de Rham forms on a closed d-manifold.  Basis
// element 0 must be the unit.  All structural identities (commutativity,
// associativity, differential squaring to zero, Leibniz, Stokes) are
// checked at construction.
class SourceModel {
 public:
  struct BasisElement {
    std::string name;
    int degree = 0;
  };

  // mul[a][b][c] = coefficient of e_c in e_a e_b
  // diff[a][b]   = coefficient of e_b in D e_a
  // integral[a]  = value of the integration functional on e_a
  SourceModel(std::string name, int dim, std::vector<BasisElement> basis,
              std::vector<std::vector<std::vector<GRat>>> mul,
              std::vector<std::vector<GRat>> diff,
              std::vector<GRat> integral);

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  int size() const { return int(basis_.size()); }
  const std::string& basis_name(int a) const { return basis_.at(a).name; }
  int find_basis(const std::string& name) const;  // -1 when absent
  int degree(int a) const { return basis_.at(a).degree; }
  int parity(int a) const { return ((degree(a) % 2) + 2) % 2; }
  GRat mul(int a, int b, int c) const { return mul_.at(a).at(b).at(c); }
  GRat diff(int a, int b) const { return diff_.at(a).at(b); }
  GRat integral(int a) const { return integral_.at(a); }
  bool has_differential() const;

  // P[a][b] = integral of e_a e_b; throws when degenerate
  std::vector<std::vector<GRat>> poincare_pairing() const;

  static SourceModel circle();      // d=1: {1, th}
  static SourceModel torus(int d);  // exterior algebra on th1..thd
  static SourceModel sphere2();     // d=2: {1, v}
  // d=3 model with a nonzero differential, for exercising kinetic terms
  static SourceModel dg_model3();

 private:
  void validate() const;

  std::string name_;
  int dim_;
  std::vector<BasisElement> basis_;
  std::vector<std::vector<std::vector<GRat>>> mul_;
  std::vector<std::vector<GRat>> diff_;
  std::vector<GRat> integral_;
};

// Element of (polynomial field algebra) tensor (source model), kept in the
// normal form sum_a f_a tensor e_a with the field polynomial on the left.
// Products move basis elements across field polynomials with Koszul signs.
class ModelPoly {
 public:
  ModelPoly() {}
  ModelPoly(const SourceModel* model, CoordsPtr fields,
            int trunc = Poly::kNoTrunc);
  static ModelPoly pure(const SourceModel* model, int a, Poly f);

  const SourceModel* model() const { return model_; }
  const CoordsPtr& fields() const { return fields_; }
  const Poly& component(int a) const { return comp_.at(a); }
  bool is_zero() const;

  ModelPoly operator+(const ModelPoly& o) const;
  ModelPoly& operator+=(const ModelPoly& o);
  ModelPoly operator-() const;
  ModelPoly operator*(const ModelPoly& o) const;
  ModelPoly operator*(const Scalar& s) const;

  ModelPoly differential() const;  // f tensor e_a -> (-1)^{p_f} f tensor De_a
  Poly integrate() const;          // sum_a f_a * integral(e_a)

 private:
  const SourceModel* model_ = nullptr;
  CoordsPtr fields_;
  int trunc_ = Poly::kNoTrunc;
  std::vector<Poly> comp_;
};

}  // namespace gbv
