#include "doctest.h"
#include "gbv/linfty.hpp"
#include "gbv/rng.hpp"

using namespace gbv;

namespace {

bool tables_equal(const LinftyAlgebra& a, const LinftyAlgebra& b,
                  int max_arity) {
  if (a.size() != b.size()) return false;
  // walk every tuple of every arity; the tables are tiny
  for (int j = 1; j <= max_arity; ++j) {
    std::vector<int> t(j, 0);
    while (true) {
      for (int k = 0; k < a.size(); ++k)
        if (a.bracket(t, k) != b.bracket(t, k)) return false;
      int pos = j - 1;
      while (pos >= 0 && ++t[pos] == a.size()) t[pos--] = 0;
      if (pos < 0) break;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("Chevalley-Eilenberg field squares to zero exactly for sl2") {
  auto ce = ce_differential(sl2_structure());
  CHECK(ce.coords->size() == 3);
  for (int k = 0; k < 3; ++k) CHECK(ce.coords->degree(k) == 1);
  for (int k = 0; k < 3; ++k) CHECK(ce.q.apply(ce.q.component(k)).is_zero());

  // abelian structure constants give the zero field
  auto ab = ce_differential(abelian_structure(3));
  CHECK(ab.q.is_zero());

  // the broken bracket is still antisymmetric, so construction succeeds,
  // but the field no longer squares to zero
  auto bad = ce_differential(broken_sl2_structure());
  bool square_zero = true;
  for (int k = 0; k < 3; ++k)
    if (!bad.q.apply(bad.q.component(k)).is_zero()) square_zero = false;
  CHECK(!square_zero);

  LieStructure ns = sl2_structure();
  ns.c[0][0][1] = GRat(1);  // not antisymmetric
  CHECK_THROWS_AS(ce_differential(ns), Error);
}

TEST_CASE("cochain differential matches the field under the dictionary") {
  auto ce = ce_differential(sl2_structure());
  Rng rng(41);
  for (int arity = 1; arity <= 2; ++arity) {
    CeComplex::Cochain f;
    std::vector<int> t(arity);
    for (int i = 0; i < arity; ++i) t[i] = i;
    while (true) {
      f[t] = rng.nonzero_rational();
      int pos = arity - 1;
      while (pos >= 0 && ++t[pos] == 3 - arity + 1 + pos) --pos;
      if (pos < 0) break;
      for (int i = pos + 1; i < arity; ++i) t[i] = t[i - 1] + 1;
    }
    Poly lhs = ce.q.apply(ce.cochain_poly(f, arity));
    Poly rhs = ce.cochain_poly(ce.d_ce(f, arity), arity + 1);
    CHECK(lhs == rhs);
  }
  // d_ce squares to zero on a 1-cochain
  CeComplex::Cochain one{{{0}, GRat(3)}, {{2}, GRat(-2, 5)}};
  auto two = ce.d_ce(one, 1);
  CHECK(ce.d_ce(two, 2).empty());
}

TEST_CASE("bracket extraction recovers the sl2 tables exactly") {
  auto ce = ce_differential(sl2_structure());
  auto g = extract_linfty(ce.q);
  CHECK(g.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(g.degree(i) == 0);
  CHECK(g.top_arity() == 2);

  auto f = sl2_structure();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) CHECK(g.bracket({i, j}, k) == f.c[i][j][k]);
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) CHECK(g.bracket({i}, k).is_zero());

  CHECK(g.certify_jacobi().passed());

  // round trip through the dual field
  auto g2 = extract_linfty(g.to_derivation());
  CHECK(tables_equal(g, g2, 3));

  // zero field: abelian structure
  auto ab = extract_linfty(ce_differential(abelian_structure(2)).q);
  CHECK(ab.top_arity() == 0);
  CHECK(ab.certify_jacobi().passed());

  CHECK_THROWS_AS(extract_linfty(ce_differential(broken_sl2_structure()).q),
                  Error);
}

TEST_CASE("extraction handles a linear Taylor term") {
  // Q(u) = v on coordinates u (deg 1), v (deg 2): a two-term complex
  auto cs = CoordinateSystem::make(
      {{"u", 1, Kind::base}, {"v", 2, Kind::base}});
  std::vector<Poly> comp{Poly::coordinate(cs, 1), Poly(cs)};
  Derivation q(cs, 1, comp, 1);
  auto g = extract_linfty(q);
  CHECK(g.top_arity() == 1);
  CHECK(g.degree(0) == 0);
  CHECK(g.degree(1) == -1);
  // l_1 l_1 = 0 on the basis
  for (int i = 0; i < 2; ++i) {
    auto once = g.apply({i});
    std::vector<GRat> twice(2);
    for (int m = 0; m < 2; ++m) {
      if (once[m].is_zero()) continue;
      auto step = g.apply({m});
      for (int k = 0; k < 2; ++k) twice[k] += once[m] * step[k];
    }
    for (int k = 0; k < 2; ++k) CHECK(twice[k].is_zero());
  }
  CHECK(g.certify_jacobi().passed());
  CHECK(tables_equal(g, extract_linfty(g.to_derivation()), 2));
}

TEST_CASE("forms extension of sl2 over the circle is a graded Lie algebra") {
  auto g = lie_linfty(sl2_structure());
  g.validate();
  CHECK(g.pairing()[0][0] == GRat(8));   // tr(ad_h ad_h)
  CHECK(g.pairing()[1][2] == GRat(4));   // tr(ad_e ad_f)
  CHECK(g.pairing()[1][1].is_zero());

  auto hat = forms_linfty(SourceModel::circle(), g);
  CHECK(hat.size() == 6);
  hat.validate();  // antisymmetry, pairing symmetry and cyclicity
  CHECK(hat.top_arity() == 2);
  CHECK(hat.certify_jacobi().passed());

  // hand values: (1 (x) X, 1 (x) Y) -> 1 (x) [X,Y] with no sign, and the
  // theta-theta bracket dies with the form product
  int h1 = 0 * 3 + 0, e1 = 0 * 3 + 1, f1 = 0 * 3 + 2;
  int hth = 1 * 3 + 0, eth = 1 * 3 + 1;
  CHECK(hat.bracket({h1, e1}, e1) == GRat(2));
  CHECK(hat.bracket({h1, eth}, eth) == GRat(2));
  CHECK(hat.bracket({hth, eth}, eth).is_zero());
  CHECK(hat.bracket({e1, f1}, h1) == GRat(1));

  // pairing support pairs 1 against theta with the Killing values
  CHECK(hat.pairing()[h1][hth] == GRat(8));
  CHECK(hat.pairing()[e1][1 * 3 + 2] == GRat(4));
  CHECK(hat.pairing()[h1][e1].is_zero());

  // abelian coefficients leave only the differential, which vanishes here
  auto flat = forms_linfty(SourceModel::circle(), lie_linfty(abelian_structure(2)));
  CHECK(flat.top_arity() == 0);
}

TEST_CASE("forms extension over a dg model keeps the dg Lie axioms") {
  auto hat = forms_linfty(SourceModel::dg_model3(), lie_linfty(sl2_structure()));
  CHECK(hat.size() == 12);
  hat.validate();
  CHECK(hat.certify_jacobi().passed());

  int n = hat.size();
  // differential squares to zero on the basis
  for (int i = 0; i < n; ++i) {
    auto once = hat.apply({i});
    std::vector<GRat> twice(n);
    for (int m = 0; m < n; ++m) {
      if (once[m].is_zero()) continue;
      auto step = hat.apply({m});
      for (int k = 0; k < n; ++k) twice[k] += once[m] * step[k];
    }
    for (int k = 0; k < n; ++k) CHECK(twice[k].is_zero());
  }
  // graded Leibniz: l1 l2(x,y) = l2(l1 x, y) + (-1)^{|x|} l2(x, l1 y)
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) {
      std::vector<GRat> lhs(n), rhs(n);
      auto br = hat.apply({x, y});
      for (int m = 0; m < n; ++m) {
        if (br[m].is_zero()) continue;
        auto d = hat.apply({m});
        for (int k = 0; k < n; ++k) lhs[k] += br[m] * d[k];
      }
      auto dx = hat.apply({x}), dy = hat.apply({y});
      for (int m = 0; m < n; ++m) {
        if (!dx[m].is_zero()) {
          auto b = hat.apply({m, y});
          for (int k = 0; k < n; ++k) rhs[k] += dx[m] * b[k];
        }
        if (!dy[m].is_zero()) {
          auto b = hat.apply({x, m});
          int sg = hat.degree(x) & 1 ? -1 : 1;
          for (int k = 0; k < n; ++k)
            rhs[k] += (sg == 1 ? dy[m] : -dy[m]) * b[k];
        }
      }
      for (int k = 0; k < n; ++k) CHECK(lhs[k] == rhs[k]);
    }
  // graded Jacobi: l2(x, l2(y,z)) = l2(l2(x,y), z) + (-1)^{|x||y|} l2(y, l2(x,z))
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z) {
        std::vector<GRat> lhs(n), r1(n), r2(n);
        auto yz = hat.apply({y, z});
        for (int m = 0; m < n; ++m) {
          if (yz[m].is_zero()) continue;
          auto b = hat.apply({x, m});
          for (int k = 0; k < n; ++k) lhs[k] += yz[m] * b[k];
        }
        auto xy = hat.apply({x, y});
        for (int m = 0; m < n; ++m) {
          if (xy[m].is_zero()) continue;
          auto b = hat.apply({m, z});
          for (int k = 0; k < n; ++k) r1[k] += xy[m] * b[k];
        }
        auto xz = hat.apply({x, z});
        int sg = (hat.degree(x) & 1) && (hat.degree(y) & 1) ? -1 : 1;
        for (int m = 0; m < n; ++m) {
          if (xz[m].is_zero()) continue;
          auto b = hat.apply({y, m});
          for (int k = 0; k < n; ++k)
            r2[k] += (sg == 1 ? xz[m] : -xz[m]) * b[k];
        }
        for (int k = 0; k < n; ++k) CHECK(lhs[k] == r1[k] + r2[k]);
      }
}

TEST_CASE("Maurer-Cartan action of the circle dg Lie algebra passes the CME") {
  auto hat = forms_linfty(SourceModel::circle(), lie_linfty(sl2_structure()));
  auto th = hmc_action(hat);
  CHECK(th.ring->size() == 6);
  // component degrees complement the basis degrees
  for (int i = 0; i < 6; ++i)
    CHECK(th.ring->degree(i) == 1 - hat.degree(i));
  CHECK(th.action.homogeneous_degree() == 2);
  CHECK(th.cme.passed());
  CHECK(th.sp.poisson_bracket(th.action, th.action).is_zero());

  // variation matches the Maurer-Cartan expression against the pairing
  auto mc = hmc_mc_expression(hat, th.psi);
  for (int b = 0; b < 6; ++b) {
    Poly lhs = th.action.left_derive(b);
    Poly rhs(th.ring);
    for (int k = 0; k < 6; ++k) {
      const GRat& p = hat.pairing()[b][k];
      if (p.is_zero()) continue;
      int e = hat.degree(b) * hat.degree(k);
      rhs += mc[k] * Scalar((e % 2) ? -p : p);
    }
    CHECK(lhs == rhs);
  }
}

TEST_CASE("quadratic Maurer-Cartan theory from a pure differential") {
  // one abelian generator with a unit pairing, extended over the dg model
  LinftyAlgebra a({"x"}, {0});
  a.set_pairing({{GRat(1)}});
  a.validate();
  auto hat = forms_linfty(SourceModel::dg_model3(), a);
  CHECK(hat.top_arity() == 1);
  auto th = hmc_action(hat);
  CHECK(th.cme.passed());
  for (const auto& [m, c] : th.action.terms()) CHECK(m.total_exponent() == 2);

  // killing the pairing on a row makes the induced structure degenerate
  auto bad = hat;
  auto p = bad.pairing();
  for (auto& row : p) row[0] = GRat();
  for (auto& v : p[0]) v = GRat();
  bad.set_pairing(p);
  CHECK_THROWS_AS(hmc_action(bad), Error);
}
