#include "doctest.h"
#include "gbv/scalar.hpp"

using namespace gbv;

TEST_CASE("gaussian rational arithmetic") {
  GRat a(1, 2), b(3);
  CHECK((a + b) == GRat(7, 2));
  CHECK((a * b) == GRat(3, 2));
  CHECK((GRat::i() * GRat::i()) == GRat(-1));
  GRat z = GRat(1) + GRat::i();           // 1 + i
  CHECK((z * z) == GRat(mpq_class(0), mpq_class(2)));
  CHECK((z / z) == GRat(1));
  CHECK((GRat(1) / z) == GRat(mpq_class(1, 2), mpq_class(-1, 2)));
  CHECK_THROWS(GRat(1) / GRat(0));
  CHECK(GRat(0, 5).is_zero());
  CHECK(GRat(2, 4) == GRat(1, 2));
}

TEST_CASE("grat printing") {
  CHECK(GRat(3, 2).str() == "3/2");
  CHECK(GRat::i().str() == "i");
  CHECK((-GRat::i()).str() == "-i");
  CHECK((GRat(3) * GRat::i()).str() == "3*i");
  CHECK((GRat(1) + GRat(1, 2) * GRat::i()).str() == "1+1/2*i");
  CHECK(GRat(0).str() == "0");
  CHECK(GRat(-2).str() == "-2");
}

TEST_CASE("hbar polynomials") {
  Scalar h = Scalar::hbar();
  Scalar s = Scalar(2) + h * Scalar(3);
  CHECK(s.hbar_degree() == 1);
  CHECK(s.coeff(0) == GRat(2));
  CHECK(s.coeff(1) == GRat(3));
  CHECK((s - s).is_zero());
  CHECK((h * h) == Scalar::hbar(2));
  CHECK(!s.is_constant());
  CHECK(Scalar(5).is_constant());
  CHECK(Scalar().is_zero());

  Scalar p = (Scalar(1) + h) * (Scalar(1) - h);  // 1 - hbar^2
  CHECK(p.coeff(0) == GRat(1));
  CHECK(p.coeff(1) == GRat(0));
  CHECK(p.coeff(2) == GRat(-1));

  CHECK((s / GRat(2)).coeff(1) == GRat(3, 2));
  CHECK(s.hbar_coefficient(1) == Scalar(3));
  CHECK(s.hbar_coefficient(7).is_zero());
}

TEST_CASE("scalar printing") {
  CHECK(Scalar().str() == "0");
  CHECK(Scalar::hbar().str() == "hbar");
  CHECK(Scalar::hbar(2).str() == "hbar^2");
  Scalar m2ih = Scalar(-2) * Scalar::i() * Scalar::hbar();
  CHECK(m2ih.str() == "-2*i*hbar");
  CHECK((Scalar(1) + Scalar::hbar()).str() == "1+hbar");
}
