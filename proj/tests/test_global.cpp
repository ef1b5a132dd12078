#include "doctest.h"
#include "gbv/rng.hpp"
#include "gbv/source_model.hpp"
#include "gbv/transgress.hpp"

using namespace gbv;

namespace {

TargetSpec so3_psm_target() {
  auto pm = psm_coords(3);
  auto g = so3_structure();
  std::vector<std::vector<Poly>> pi(3, std::vector<Poly>(3, Poly(pm)));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        if (!g.c[i][j][k].is_zero())
          pi[i][j] = pi[i][j] + Poly::coordinate(pm, k) * Scalar(g.c[i][j][k]);
  return build_psm_target(pm, pi);
}

}  // namespace

TEST_CASE("global action over the identity chart family") {
  auto target = so3_psm_target();
  auto t2 = SourceModel::torus(2);
  auto ctx = FormalContext::make(3);
  auto em = FormalExpMap::identity(ctx, 3);
  auto th = formal_global_action(target, t2, em, 3);

  CHECK(th.ring->size() == 30);
  CHECK(th.base_dim == 3);
  CHECK(th.order == 3);

  // flat connection of the identity chart: R^j_l = -delta^j_l, and the
  // remaining sign comes from moving the odd top component of B past dx,
  // so the connection term is +sum_l dx^l B_l(top)
  Poly want(th.ring, 3);
  for (int l = 0; l < 3; ++l)
    want = want + Poly::coordinate(th.ring, "dx" + std::to_string(l + 1), 3) *
                      Poly::coordinate(
                          th.ring, "B" + std::to_string(l + 1) + "_t12", 3);
  CHECK(th.connection == want);

  auto rep = check_dcme(th);
  CHECK(rep.passed());
  CHECK(rep.verified_order == 2);
}

TEST_CASE("superfield integral transports the odd bracket") {
  // {int f, int g} on the fields equals int {f, g} on the chart; this is
  // what lets check_dcme assemble the residual before expanding
  auto tcs = CoordinateSystem::make({{"x", 0, Kind::base},
                                     {"dx", 1, Kind::base},
                                     {"q", 0, Kind::fiber},
                                     {"B", 1, Kind::base}});
  auto aux =
      CoordinateSystem::make({{"q", 0, Kind::base}, {"B", 1, Kind::base}});
  auto aux_sp = ConstantSymplectic::from_pairs(aux, 1, {{"q", "B", GRat(1)}});
  std::vector<std::vector<GRat>> bc(4, std::vector<GRat>(4));
  std::vector<std::vector<GRat>> form(4, std::vector<GRat>(4));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      bc[2 + i][2 + j] = aux_sp.bracket_matrix()[i][j];
      form[2 + i][2 + j] = aux_sp.form_matrix()[i][j];
    }
  auto chart_sp = ConstantSymplectic::from_bracket_matrix(tcs, 1, bc, false);

  auto t2 = SourceModel::torus(2);
  Superfields sf(tcs, &t2, {false, false, true, true},
                 {Kind::base, Kind::base, Kind::fiber, Kind::base}, 6);
  auto fsp = transgressed_symplectic(form, sf);

  Rng rng(7);
  auto rand_poly = [&](int nterms) {
    Poly f(tcs, 6);
    for (int t = 0; t < nterms; ++t) {
      Poly mono = Poly::constant(tcs, Scalar(rng.nonzero_rational()), 6);
      for (int c = 0; c < 4; ++c) {
        int e = int(rng.uniform(0, tcs->odd(c) ? 1 : 2));
        for (int k = 0; k < e; ++k)
          mono = mono * Poly::coordinate(tcs, c, 6);
      }
      f = f + mono;
    }
    return f;
  };
  for (int trial = 0; trial < 8; ++trial) {
    Poly f = rand_poly(3), g = rand_poly(3);
    Poly lhs = fsp.poisson_bracket(sf.integrate(f), sf.integrate(g));
    Poly rhs = sf.integrate(chart_sp.poisson_bracket(f, g));
    CHECK(lhs == rhs);
  }
}

TEST_CASE("chart-level residual equals the field-level residual") {
  auto target = so3_psm_target();
  auto t2 = SourceModel::torus(2);
  auto ctx = FormalContext::make(3);
  Rng rng(2026);
  auto em = random_exp_map(ctx, 2, rng, 2);
  auto th = formal_global_action(target, t2, em, 2);

  Poly l = th.integrand_aksz + th.integrand_connection;
  Poly chart_resid =
      th.chart_base_differential().apply(l) +
      th.chart_sp.poisson_bracket(l, l) * Scalar(GRat(1, 2));
  Poly fast = th.expansion->integrate(chart_resid);

  Derivation dx = th.base_differential();
  Poly generic =
      dx.apply(th.action) +
      th.sp.poisson_bracket(th.action, th.action) * Scalar(GRat(1, 2));
  CHECK(fast == generic);

  // the form-degree-zero sector is the ordinary master equation of the
  // chart-wise action
  Poly cme = th.sp.poisson_bracket(th.aksz, th.aksz) * Scalar(GRat(1, 2));
  Poly resid0 = generic.filter([&](const Monomial& mo) {
    for (int l2 : th.dx_indices)
      if (mo.exp(l2)) return false;
    return true;
  });
  CHECK(resid0 == cme);
}

TEST_CASE("differential master equation for a curved chart family") {
  auto target = so3_psm_target();
  auto t2 = SourceModel::torus(2);
  auto ctx = FormalContext::make(3);
  Rng rng(2026);
  auto em = random_exp_map(ctx, 4, rng, 2);
  auto th = formal_global_action(target, t2, em, 4);

  auto rep = check_dcme(th);
  CHECK(rep.passed());
  CHECK(rep.verified_order == 3);

  // dropping the connection coupling breaks the identity in form degree one
  auto bad = check_dcme(th.without_connection());
  CHECK(!bad.passed());
}

TEST_CASE("global action construction rejects unusable input") {
  auto target = so3_psm_target();
  auto t2 = SourceModel::torus(2);
  auto ctx = FormalContext::make(3);
  auto em = FormalExpMap::identity(ctx, 3);

  // model dimension mismatch
  CHECK_THROWS_AS(
      formal_global_action(target, SourceModel::torus(3), em, 3), Error);
  // base dimension mismatch
  auto ctx2 = FormalContext::make(2);
  CHECK_THROWS_AS(
      formal_global_action(target, t2, FormalExpMap::identity(ctx2, 3), 3),
      Error);
  // truncation above the exponential map order
  CHECK_THROWS_WITH_AS(formal_global_action(target, t2, em, 5),
                       doctest::Contains("truncated"), Error);
  // non-split target
  auto bf = build_bf_target(sl2_structure(), 2);
  CHECK_THROWS_WITH_AS(formal_global_action(bf, t2, em, 3),
                       doctest::Contains("split"), Error);
}
