#include "doctest.h"
#include "gbv/formal.hpp"

using namespace gbv;

namespace {

// 1-dim map x + p + (g/2) p^2 with constant g
FormalExpMap one_dim_quadratic(const FormalContext& ctx, int order, GRat g) {
  return FormalExpMap(ctx, order,
                      {{0, {0, 0}, Poly::constant(ctx.cs, Scalar(g))}});
}

}  // namespace

TEST_CASE("fiber jacobian inversion") {
  auto ctx = FormalContext::make(2);
  auto id = FormalExpMap::identity(ctx, 4);
  auto j = id.fiber_jacobian();
  CHECK(j[0][0] == Poly::one(ctx.cs).with_truncation(4));
  CHECK(j[0][1].is_zero());
  auto jinv = id.inverse_fiber_jacobian();
  CHECK(jinv[1][1] == Poly::one(ctx.cs).with_truncation(4));
  CHECK(jinv[1][0].is_zero());

  // 1-dim x+p+(g/2)p^2: jacobian 1+gp, inverse the geometric series
  auto c1 = FormalContext::make(1);
  GRat g(3, 2);
  auto em = one_dim_quadratic(c1, 4, g);
  Poly p = c1.p(0, 4);
  Poly want = Poly::one(c1.cs).with_truncation(4);
  Poly gp = p * Scalar(g);
  want = want - gp + gp * gp - gp * gp * gp + gp * gp * gp * gp;
  CHECK(em.inverse_fiber_jacobian()[0][0] == want);

  // defining property in the truncated ring, for a seeded random map
  auto c3 = FormalContext::make(3);
  Rng rng(7);
  auto rem = random_exp_map(c3, 4, rng);
  auto rj = rem.fiber_jacobian();
  auto rjinv = rem.inverse_fiber_jacobian();
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) {
      Poly s(c3.cs, 4);
      for (int l = 0; l < 3; ++l) s += rj[i][l] * rjinv[l][k];
      // J (J^{-1}) = id, with J^{-1} on the right: swap arguments the same way
      Poly s2(c3.cs, 4);
      for (int l = 0; l < 3; ++l) s2 += rjinv[i][l] * rj[l][k];
      Poly want3 = i == k ? Poly::one(c3.cs).with_truncation(4) : Poly(c3.cs);
      CHECK(s == want3);
      CHECK(s2 == want3);
    }
}

TEST_CASE("exp map validation") {
  auto ctx = FormalContext::make(2);
  CHECK_THROWS_AS(FormalExpMap(ctx, 4, {{0, {1}, Poly::one(ctx.cs)}}), Error);
  CHECK_THROWS_AS(FormalExpMap(ctx, 4, {{5, {0, 0}, Poly::one(ctx.cs)}}),
                  Error);
  // symmetry: {0,1} and {1,0} name the same entry
  CHECK_THROWS_AS(FormalExpMap(ctx, 4,
                               {{0, {0, 1}, Poly::one(ctx.cs)},
                                {0, {1, 0}, Poly::one(ctx.cs)}}),
                  Error);
  // fiber-dependent coefficient rejected
  CHECK_THROWS_AS(FormalExpMap(ctx, 4, {{0, {0, 0}, ctx.p(0)}}), Error);
  // symmetric contraction: phi^1_{12}=c gives a c p1 p2 term (both orders)
  Poly c = Poly::constant(ctx.cs, Scalar(4));
  FormalExpMap em(ctx, 4, {{0, {0, 1}, c}});
  Poly expect = ctx.x(0, 4) + ctx.p(0, 4) + ctx.p(0, 4) * ctx.p(1, 4) * Scalar(4);
  CHECK(em.phi(0) == expect);
}

TEST_CASE("connection components") {
  auto c1 = FormalContext::make(1);
  GRat g(2);
  auto em = one_dim_quadratic(c1, 4, g);
  auto r = ConnectionOneForm::from_exp_map(em);
  // constant-coefficient 1-dim case: R = -(inverse jacobian)
  Poly p = c1.p(0, 4);
  Poly gp = p * Scalar(g);
  Poly want = -(Poly::one(c1.cs).with_truncation(4) - gp + gp * gp -
                gp * gp * gp + gp * gp * gp * gp);
  CHECK(r.component(0, 0) == want);

  // identity map in any dimension: R = -id exactly
  auto c2 = FormalContext::make(2);
  auto r2 = ConnectionOneForm::from_exp_map(FormalExpMap::identity(c2, 3));
  CHECK(r2.component(0, 0) == -Poly::one(c2.cs).with_truncation(3));
  CHECK(r2.component(0, 1).is_zero());
  CHECK(r2.component(1, 0).is_zero());

  // leading part enforced
  std::vector<std::vector<Poly>> bad = {{Poly::one(c1.cs).with_truncation(4)}};
  CHECK_THROWS_AS(ConnectionOneForm(c1, 4, bad), Error);
}

TEST_CASE("taylor pullback") {
  auto ctx = FormalContext::make(1);
  auto id = FormalExpMap::identity(ctx, 4);
  Poly x = ctx.x(0), p = ctx.p(0, 4);
  CHECK(taylor_pullback(id, x * x) == (ctx.x(0, 4) + p) * (ctx.x(0, 4) + p));
  CHECK(taylor_pullback(id, Poly::constant(ctx.cs, Scalar(7, 3))) ==
        Poly::constant(ctx.cs, Scalar(7, 3), 4));
  CHECK_THROWS_AS(taylor_pullback(id, p), Error);

  // order-2 coefficient: 1/2 p^j p^k (d_j d_k f + phi^i_{jk} d_i f)
  auto c2 = FormalContext::make(2);
  Rng rng(11);
  std::vector<ExpCoeff> coeffs;
  std::map<std::pair<int, std::pair<int, int>>, Poly> tens;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = j; k < 2; ++k) {
        Poly c = Poly::constant(c2.cs, Scalar(rng.rational())) +
                 c2.x(0) * Scalar(rng.rational()) +
                 c2.x(1) * Scalar(rng.rational());
        coeffs.push_back({i, {j, k}, c});
        tens[{i, {j, k}}] = c;
        tens[{i, {k, j}}] = c;
      }
  FormalExpMap em(c2, 4, coeffs);
  Poly f = c2.x(0) * c2.x(0) * c2.x(1) + c2.x(1) * c2.x(1) * Scalar(5);
  Poly got = taylor_pullback(em, f).fiber_component(2);
  Poly want(c2.cs, 4);
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k) {
      Poly term = f.left_derive(c2.x_index(k)).left_derive(c2.x_index(j));
      for (int i = 0; i < 2; ++i)
        term += tens[{i, {j, k}}] * f.left_derive(c2.x_index(i));
      want += c2.p(j, 4) * c2.p(k, 4) * term * Scalar(1, 2);
    }
  CHECK(got == want.with_truncation(4));
}

TEST_CASE("flatness") {
  // any 1-dim connection is flat
  auto c1 = FormalContext::make(1);
  Rng rng(3);
  auto em1 = random_exp_map(c1, 5, rng);
  CHECK(check_flatness(ConnectionOneForm::from_exp_map(em1)).passed());

  // identity map in higher dimension
  auto c3 = FormalContext::make(3);
  CHECK(check_flatness(
            ConnectionOneForm::from_exp_map(FormalExpMap::identity(c3, 4)))
            .passed());

  // the substantial case: seeded random maps with x-dependent coefficients
  for (uint64_t seed : {1u, 2u, 3u, 4u}) {
    Rng r2(seed);
    auto c2 = FormalContext::make(2);
    auto em = random_exp_map(c2, 4, r2);
    CheckReport rep = check_flatness(ConnectionOneForm::from_exp_map(em));
    CHECK(rep.passed());
    CHECK(rep.verified_order == 3);
  }

  // hand-broken connection fails
  auto c2 = FormalContext::make(2);
  Rng r9(9);
  auto em = random_exp_map(c2, 4, r9);
  auto good = ConnectionOneForm::from_exp_map(em);
  std::vector<std::vector<Poly>> comp(2, std::vector<Poly>(2));
  for (int l = 0; l < 2; ++l)
    for (int j = 0; j < 2; ++j) comp[l][j] = good.component(l, j);
  comp[0][1] += c2.p(0, 4) * c2.p(1, 4) * c2.x(0, 4);
  CheckReport bad = check_flatness(ConnectionOneForm(c2, 4, comp));
  CHECK(bad.status == Status::fail);
  CHECK(!bad.residual.empty());
}

TEST_CASE("pullback sections are d-closed") {
  auto c1 = FormalContext::make(1);
  auto id = FormalExpMap::identity(c1, 4);
  auto r1 = ConnectionOneForm::from_exp_map(id);
  CHECK(check_d_closed(r1, id, c1.x(0) * c1.x(0)).passed());

  // explicit non-pullback section fails with a dx residual
  CheckReport bad = check_d_closed_section(r1, c1.p(0, 4));
  CHECK(bad.status == Status::fail);
  REQUIRE(!bad.residual.empty());
  CHECK(bad.residual[0].first == "dx1");

  for (uint64_t seed : {21u, 22u}) {
    Rng rng(seed);
    auto c3 = FormalContext::make(3);
    auto em = random_exp_map(c3, 4, rng);
    auto r = ConnectionOneForm::from_exp_map(em);
    Poly f = c3.x(0) * c3.x(1) * c3.x(2) +
             c3.x(1) * c3.x(1) * c3.x(0) * Scalar(2) + c3.x(2);
    CHECK(check_d_closed(r, em, f).passed());
  }
}

TEST_CASE("homotopy identity") {
  auto ctx = FormalContext::make(2);
  CHECK(homotopy_identity(ctx, ctx.p(1)).passed());
  CHECK(homotopy_identity(ctx, ctx.dx(0)).passed());
  CHECK(homotopy_identity(ctx, ctx.x(0) * ctx.x(0) * ctx.p(1) * ctx.dx(0))
            .passed());
  CHECK(homotopy_identity(ctx, ctx.x(0)).passed());  // eigenvalue 0
  Poly sig = ctx.dx(0) * ctx.dx(1) * ctx.p(0) * ctx.p(0) +
             ctx.p(1) * ctx.p(0) * ctx.dx(1) * ctx.dx(0) * Scalar(3, 2);
  CHECK(homotopy_identity(ctx, sig).passed());
  CHECK_THROWS_AS(homotopy_identity(ctx, ctx.p(0) + ctx.dx(0) * ctx.p(1)),
                  Error);
}

TEST_CASE("family generator") {
  // constant family: t-independent map gives C = 0
  auto ctx = FormalContext::make(2, {"t"});
  Rng rng(31);
  auto em0 = random_exp_map(ctx, 4, rng);
  Poly f0 = ctx.x(0) * ctx.x(1);
  auto [c0, rep0] = family_generator(em0, "t", f0);
  CHECK(rep0.passed());
  CHECK(c0.is_zero());

  // 1-dim x + p + t c p^2: C = -c p^2 (1 + 2tcp)^{-1}
  auto c1 = FormalContext::make(1, {"t"});
  GRat cc(1, 2);
  FormalExpMap em(
      c1, 4, {{0, {0, 0}, c1.param("t") * Scalar(GRat(2) * cc)}});
  Poly p = c1.p(0, 4), t = c1.param("t", 4);
  auto [gen, rep] = family_generator(em, "t", c1.x(0) * c1.x(0) * c1.x(0));
  CHECK(rep.passed());
  Poly u = t * p * Scalar(GRat(2) * cc);  // 2tcp
  Poly series = Poly::one(c1.cs).with_truncation(4) - u + u * u;  // mod p^3
  Poly want = -(p * p * Scalar(cc) * series).with_truncation(4);
  CHECK(gen.component(c1.p_index(0)) == want);

  // interpolation between two random quadratic maps
  auto ci = FormalContext::make(2, {"t"});
  Rng r2(77);
  Poly one = Poly::one(ci.cs), tt = ci.param("t");
  std::vector<ExpCoeff> coeffs;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = j; k < 2; ++k) {
        Poly a = Poly::constant(ci.cs, Scalar(r2.rational())) +
                 ci.x(0) * Scalar(r2.rational());
        Poly b = Poly::constant(ci.cs, Scalar(r2.rational())) +
                 ci.x(1) * Scalar(r2.rational());
        coeffs.push_back({i, {j, k}, a * (one - tt) + b * tt});
      }
  FormalExpMap emi(ci, 4, coeffs);
  Poly fi = ci.x(0) * ci.x(0) * ci.x(1);
  auto [ci_gen, rep_i] = family_generator(emi, "t", fi);
  CHECK(rep_i.passed());
  CHECK(!ci_gen.is_zero());
}

TEST_CASE("volume compatibility") {
  auto c1 = FormalContext::make(1);
  auto id = FormalExpMap::identity(c1, 4);
  auto r1 = ConnectionOneForm::from_exp_map(id);
  CHECK(check_volume_compatibility(r1, FormalVolume(Poly::one(c1.cs), 4))
            .passed());

  // transported coordinate volume: rho = det(fiber jacobian)
  for (uint64_t seed : {41u, 42u}) {
    Rng rng(seed);
    auto c2 = FormalContext::make(2);
    auto em = random_exp_map(c2, 4, rng);
    auto r = ConnectionOneForm::from_exp_map(em);
    CHECK(check_volume_compatibility(r, pullback_volume(em)).passed());
    // flat density against a curved map fails
    CheckReport bad =
        check_volume_compatibility(r, FormalVolume(Poly::one(c2.cs), 4));
    CHECK(bad.status == Status::fail);
    CHECK(!bad.residual.empty());
  }

  CHECK_THROWS_AS(FormalVolume(c1.p(0), 4), Error);  // not invertible at 0
}
