// size/time measurement for the global action pipeline, not installed
#include <cstdio>

#include "gbv/rng.hpp"
#include "gbv/source_model.hpp"
#include "gbv/transgress.hpp"

using namespace gbv;

static void bracket_transport_experiment() {
  auto tcs = CoordinateSystem::make({{"x", 0, Kind::base},
                                     {"dx", 1, Kind::base},
                                     {"q", 0, Kind::fiber},
                                     {"B", 1, Kind::base}});
  auto aux = CoordinateSystem::make({{"q", 0, Kind::base}, {"B", 1, Kind::base}});
  auto aux_sp = ConstantSymplectic::from_pairs(aux, 1, {{"q", "B", GRat(1)}});
  std::vector<std::vector<GRat>> bext(4, std::vector<GRat>(4));
  std::vector<std::vector<GRat>> text(4, std::vector<GRat>(4));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      bext[2 + i][2 + j] = aux_sp.bracket_matrix()[i][j];
      text[2 + i][2 + j] = aux_sp.form_matrix()[i][j];
    }
  auto ext_sp = ConstantSymplectic::from_bracket_matrix(tcs, 1, bext, false);

  auto t2 = SourceModel::torus(2);
  Superfields sf(tcs, &t2, {false, false, true, true},
                 {Kind::base, Kind::base, Kind::fiber, Kind::base}, 6);
  auto fsp = transgressed_symplectic(text, sf);

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
    Poly lhs = fsp.poisson_bracket(sf.transgress(f), sf.transgress(g));
    Poly rhs = sf.transgress(ext_sp.poisson_bracket(f, g));
    const char* verdict = "NEITHER";
    if (lhs == rhs) verdict = "plus";
    else if (lhs == -rhs) verdict = "minus";
    else if (lhs.is_zero() && rhs.is_zero()) verdict = "both-zero";
    std::printf("trial %d: {Tf,Tg} vs T({f,g}): %s (lhs %d terms, rhs %d)\n",
                trial, verdict, lhs.term_count(), rhs.term_count());
  }
}

int main(int argc, char** argv) {
  if (argc > 1 && std::string(argv[1]) == "bracket") {
    bracket_transport_experiment();
    return 0;
  }
  int order = argc > 1 ? std::atoi(argv[1]) : 3;
  auto pm = psm_coords(3);
  auto g = so3_structure();
  std::vector<std::vector<Poly>> pi(3, std::vector<Poly>(3, Poly(pm)));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        if (!g.c[i][j][k].is_zero())
          pi[i][j] = pi[i][j] + Poly::coordinate(pm, k) * Scalar(g.c[i][j][k]);
  auto target = build_psm_target(pm, pi);
  auto t2 = SourceModel::torus(2);
  auto ctx = FormalContext::make(3);
  Rng rng(2026);
  auto em = random_exp_map(ctx, order, rng, 2);

  Timer t0;
  auto th = formal_global_action(target, t2, em, order);
  std::printf("build: %.1f ms, aksz %d terms, conn %d terms, integrand %d+%d\n",
              t0.ms(), th.aksz.term_count(), th.connection.term_count(),
              th.integrand_aksz.term_count(),
              th.integrand_connection.term_count());

  Timer t1;
  auto rep = check_dcme(th);
  std::printf("check_dcme: %.1f ms, %s, verified order %d\n", t1.ms(),
              rep.passed() ? "pass" : "FAIL", rep.verified_order);
  return 0;
}
