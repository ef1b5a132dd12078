#include "doctest.h"
#include "gbv/symplectic.hpp"

using namespace gbv;

namespace {

// degree-0 fields x^i with degree-1 momenta p_i, odd bracket of degree -1
struct PoissonModel {
  CoordsPtr cs = CoordinateSystem::make(
      {{"x1", 0}, {"x2", 0}, {"x3", 0}, {"p1", 1}, {"p2", 1}, {"p3", 1}});
  ConstantSymplectic sp = ConstantSymplectic::from_pairs(
      cs, 1,
      {{"x1", "p1", GRat(1)}, {"x2", "p2", GRat(1)}, {"x3", "p3", GRat(1)}});

  Poly c(const char* n) const { return Poly::coordinate(cs, n); }

  // 1/2 pi^{ij}(x) p_i p_j for the linear so(3)-type structure
  Poly theta_so3() const {
    return c("x3") * c("p1") * c("p2") + c("x1") * c("p2") * c("p3") +
           c("x2") * c("p3") * c("p1");
  }
  // deformed, non-Poisson bivector: pi^{12} = x3 + x1^2
  Poly theta_broken() const {
    return theta_so3() + c("x1") * c("x1") * c("p1") * c("p2");
  }
};

}  // namespace

TEST_CASE("bracket matrix validation") {
  auto cs = CoordinateSystem::make({{"x", 0}, {"k", -1}});
  // degree rule: deg x + deg k = -1 must equal the form degree
  CHECK_THROWS_AS(ConstantSymplectic::from_pairs(cs, 0, {{"x", "k", GRat(1)}}),
                  Error);
  auto ok = ConstantSymplectic::from_pairs(cs, -1, {{"x", "k", GRat(1)}});
  CHECK(ok.bracket_entry(0, 1) == GRat(1));
  CHECK(ok.bracket_entry(1, 0) == GRat(-1));

  // explicitly wrong mirror entry
  std::vector<std::vector<GRat>> bad = {{GRat(0), GRat(1)},
                                        {GRat(1), GRat(0)}};
  CHECK_THROWS_AS(ConstantSymplectic::from_bracket_matrix(cs, -1, bad), Error);
  // degenerate matrix
  std::vector<std::vector<GRat>> sing(2, std::vector<GRat>(2));
  CHECK_THROWS_AS(ConstantSymplectic::from_bracket_matrix(cs, -1, sing),
                  Error);
}

TEST_CASE("matrix inverse is exact") {
  std::vector<std::vector<GRat>> m = {{GRat(2), GRat(1)},
                                      {GRat(1), GRat(1)}};
  auto inv = invert_matrix(m);
  CHECK(inv[0][0] == GRat(1));
  CHECK(inv[0][1] == GRat(-1));
  CHECK(inv[1][0] == GRat(-1));
  CHECK(inv[1][1] == GRat(2));
  PoissonModel pm;
  const auto& b = pm.sp.bracket_matrix();
  const auto& w = pm.sp.form_matrix();
  int n = pm.cs->size();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      GRat s;
      for (int k = 0; k < n; ++k) s += b[i][k] * w[k][j];
      CHECK(s == (i == j ? GRat(1) : GRat(0)));
    }
}

TEST_CASE("poisson bracket basics") {
  PoissonModel pm;
  Poly x1 = pm.c("x1"), p1 = pm.c("p1"), p2 = pm.c("p2"), x2 = pm.c("x2");

  CHECK(pm.sp.poisson_bracket(x1, p1) == Poly::one(pm.cs));
  CHECK(pm.sp.poisson_bracket(p1, x1) == -Poly::one(pm.cs));
  CHECK(pm.sp.poisson_bracket(x1, p2).is_zero());
  CHECK(pm.sp.poisson_bracket(x1, x2).is_zero());

  // degree of the bracket is |f| + |g| - 1
  Poly br = pm.sp.poisson_bracket(p1 * p2, x1 * x2);
  CHECK(br.homogeneous_degree() == 1);

  // graded antisymmetry in shifted degree: {f,g} = -(-1)^{(|f|+1)(|g|+1)}{g,f}
  Poly f = x1 * p2 + pm.c("p3"), g = x2 * p1;
  // |f| = |g| = 1, so both have even shifted degree: plain antisymmetry
  Poly lhs = pm.sp.poisson_bracket(f, g);
  Poly rhs = -pm.sp.poisson_bracket(g, f);
  CHECK(lhs == rhs);
  // mixed case: x1 has shifted degree 1, g shifted degree 2
  CHECK(pm.sp.poisson_bracket(x1, g) == -pm.sp.poisson_bracket(g, x1));
}

TEST_CASE("bracket is a biderivation") {
  PoissonModel pm;
  Poly f = pm.c("x1") * pm.c("p2"), g = pm.c("p1"),
       h = pm.c("x2") * pm.c("x3") + pm.c("x1");
  // {f, gh} = {f,g} h + (-1)^{(|f|+1)|g|} g {f,h}
  Poly lhs = pm.sp.poisson_bracket(f, g * h);
  Poly rhs = pm.sp.poisson_bracket(f, g) * h +
             g * pm.sp.poisson_bracket(f, h);  // |f|+1 = 2, sign +
  CHECK(lhs == rhs);
}

TEST_CASE("jacobi identity in shifted degrees") {
  PoissonModel pm;
  Poly f = pm.c("x1") * pm.c("p1"), g = pm.c("p2") * pm.c("x3"),
       h = pm.c("x2") * pm.c("p3") + pm.c("x1") * pm.c("p1");
  // all three have degree 1, shifted degree 2 (even): plain Jacobi
  Poly lhs = pm.sp.poisson_bracket(f, pm.sp.poisson_bracket(g, h));
  Poly rhs = pm.sp.poisson_bracket(pm.sp.poisson_bracket(f, g), h) +
             pm.sp.poisson_bracket(g, pm.sp.poisson_bracket(f, h));
  CHECK(lhs == rhs);
}

TEST_CASE("hamiltonian vector field realizes the bracket") {
  PoissonModel pm;
  Poly theta = pm.theta_so3();
  Derivation q = pm.sp.hamiltonian_vf(theta);
  CHECK(q.parity() == 1);
  CHECK(q.degree() == 1);
  for (const Poly& g :
       {pm.c("x1"), pm.c("p2"), pm.c("x2") * pm.c("p3") * pm.c("p1")}) {
    CHECK(q.apply(g) == pm.sp.poisson_bracket(theta, g));
  }
  // master equation makes the field square to zero
  CHECK(lie_bracket(q, q).is_zero());
}

TEST_CASE("classical master equation for the so(3) structure") {
  PoissonModel pm;
  CHECK(pm.sp.poisson_bracket(pm.theta_so3(), pm.theta_so3()).is_zero());

  CheckReport rep = check_master_equation(pm.sp, pm.theta_so3());
  CHECK(rep.status == Status::pass);
  CHECK(rep.residual.empty());

  CheckReport bad = check_master_equation(pm.sp, pm.theta_broken());
  CHECK(bad.status == Status::fail);
  REQUIRE(!bad.residual.empty());
  // jacobiator term 2 x1 x2 p1 p2 p3 shows up in the residual
  CHECK(bad.residual[0].first == "x1*x2*p1*p2*p3");
}

TEST_CASE("odd laplacian") {
  PoissonModel pm;
  Poly x1 = pm.c("x1"), p1 = pm.c("p1");
  CHECK(pm.sp.laplacian(x1 * p1) == Poly::one(pm.cs));
  CHECK(pm.sp.laplacian(x1 * pm.c("p2")).is_zero());
  CHECK(pm.sp.laplacian(pm.c("x2")).is_zero());

  // laplacian squares to zero
  Poly f = pm.theta_broken() + x1 * p1 * pm.c("x2") * pm.c("p2");
  CHECK(pm.sp.laplacian(pm.sp.laplacian(f)).is_zero());

  // failure identity: D(fg) = (Df) g + (-1)^{p_f} f (Dg) + (-1)^{p_f} {f,g}
  Poly g = pm.c("x2") * p1 + pm.c("p3");
  Poly fe = x1 * pm.c("x2") + p1 * pm.c("p2");  // even
  Poly lhs = pm.sp.laplacian(fe * g);
  Poly rhs = pm.sp.laplacian(fe) * g + fe * pm.sp.laplacian(g) +
             pm.sp.poisson_bracket(fe, g);
  CHECK(lhs == rhs);
  Poly fo = p1 + x1 * pm.c("p2");  // odd
  Poly lhs2 = pm.sp.laplacian(fo * g);
  Poly rhs2 = pm.sp.laplacian(fo) * g - fo * pm.sp.laplacian(g) -
              pm.sp.poisson_bracket(fo, g);
  CHECK(lhs2 == rhs2);

  // even form degree has no odd laplacian
  auto cs = CoordinateSystem::make({{"a", 0}, {"b", 0}});
  auto even_sp = ConstantSymplectic::from_pairs(cs, 0, {{"a", "b", GRat(1)}});
  CHECK_THROWS_AS(even_sp.laplacian(Poly::coordinate(cs, "a")), Error);
}

TEST_CASE("quantum master equation") {
  PoissonModel pm;
  // so(3) theta: divergence-free, so QME holds at all hbar orders
  CheckReport rep = check_quantum_master_equation(pm.sp, pm.theta_so3());
  CHECK(rep.status == Status::pass);

  // x1 p1 x2 p2 violates the classical part
  CheckReport bad =
      check_quantum_master_equation(pm.sp, pm.c("x1") * pm.c("p1"));
  CHECK(bad.status == Status::fail);
  // residual carries the hbar term -2 i hbar
  bool has_hbar = false;
  for (auto& [m, c] : bad.residual)
    if (c.find("hbar") != std::string::npos) has_hbar = true;
  CHECK(has_hbar);
}
