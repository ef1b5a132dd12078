#include "gbv/symplectic.hpp"

namespace gbv {

namespace {

void fill_residual(CheckReport& rep, const Poly& r) {
  rep.residual = r.leading_terms(10);
}

}  // namespace

std::vector<std::vector<GRat>> invert_matrix(
    const std::vector<std::vector<GRat>>& m) {
  int n = int(m.size());
  std::vector<std::vector<GRat>> a = m, inv(n, std::vector<GRat>(n));
  for (int i = 0; i < n; ++i) {
    if (int(m[i].size()) != n) throw Error("invert_matrix: not square");
    inv[i][i] = GRat(1);
  }
  for (int col = 0; col < n; ++col) {
    int piv = -1;
    for (int r = col; r < n; ++r)
      if (!a[r][col].is_zero()) {
        piv = r;
        break;
      }
    if (piv < 0) throw Error("invert_matrix: singular matrix");
    std::swap(a[piv], a[col]);
    std::swap(inv[piv], inv[col]);
    GRat d = a[col][col];
    for (int c = 0; c < n; ++c) {
      a[col][c] = a[col][c] / d;
      inv[col][c] = inv[col][c] / d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col || a[r][col].is_zero()) continue;
      GRat f = a[r][col];
      for (int c = 0; c < n; ++c) {
        a[r][c] -= f * a[col][c];
        inv[r][c] -= f * inv[col][c];
      }
    }
  }
  return inv;
}

ConstantSymplectic ConstantSymplectic::from_bracket_matrix(
    CoordsPtr cs, int form_degree, std::vector<std::vector<GRat>> b,
    bool invertible) {
  int n = cs->size();
  if (int(b.size()) != n) throw Error("bracket matrix has wrong size");
  for (auto& row : b)
    if (int(row.size()) != n) throw Error("bracket matrix has wrong size");
  for (int mu = 0; mu < n; ++mu) {
    for (int nu = 0; nu < n; ++nu) {
      if (b[mu][nu].is_zero()) continue;
      if (cs->degree(mu) + cs->degree(nu) != form_degree)
        throw Error("bracket of " + cs->name(mu) + ", " + cs->name(nu) +
                    " violates the degree rule");
      GRat mirror = -b[mu][nu];
      if ((cs->parity(mu) * (form_degree + 1)) & 1) mirror = -mirror;
      if (b[nu][mu] != mirror)
        throw Error("bracket matrix not graded antisymmetric at " +
                    cs->name(mu) + ", " + cs->name(nu));
    }
  }
  ConstantSymplectic sp;
  sp.cs_ = std::move(cs);
  sp.n_ = form_degree;
  if (invertible) sp.omega_ = invert_matrix(b);  // also proves nondegeneracy
  sp.b_ = std::move(b);
  return sp;
}

const std::vector<std::vector<GRat>>& ConstantSymplectic::form_matrix() const {
  if (omega_.empty())
    throw Error("symplectic form is unavailable for a degenerate bracket");
  return omega_;
}

ConstantSymplectic ConstantSymplectic::from_pairs(
    CoordsPtr cs, int form_degree,
    const std::vector<std::tuple<std::string, std::string, GRat>>& pairs) {
  int n = cs->size();
  std::vector<std::vector<GRat>> b(n, std::vector<GRat>(n));
  for (const auto& [pn, qn, v] : pairs) {
    int mu = cs->index(pn), nu = cs->index(qn);
    b[mu][nu] = v;
    GRat mirror = -v;
    if ((cs->parity(mu) * (form_degree + 1)) & 1) mirror = -mirror;
    b[nu][mu] = mirror;
  }
  return from_bracket_matrix(std::move(cs), form_degree, std::move(b));
}

Poly ConstantSymplectic::poisson_bracket(const Poly& f, const Poly& g) const {
  Poly r(g.coords(), std::min(f.truncation(), g.truncation()));
  int n = cs_->size();
  std::vector<Poly> rd(n), ld(n);
  std::vector<bool> have_rd(n, false), have_ld(n, false);
  for (int mu = 0; mu < n; ++mu) {
    for (int nu = 0; nu < n; ++nu) {
      if (b_[mu][nu].is_zero()) continue;
      if (!have_rd[mu]) {
        rd[mu] = f.right_derive(mu);
        have_rd[mu] = true;
      }
      if (rd[mu].is_zero()) continue;
      if (!have_ld[nu]) {
        ld[nu] = g.left_derive(nu);
        have_ld[nu] = true;
      }
      if (ld[nu].is_zero()) continue;
      r += rd[mu] * Scalar(b_[mu][nu]) * ld[nu];
    }
  }
  return r;
}

Derivation ConstantSymplectic::hamiltonian_vf(const Poly& f) const {
  auto pf = f.parity();
  if (!pf) throw Error("hamiltonian_vf: hamiltonian has mixed parity");
  int n = cs_->size();
  std::vector<Poly> comp(n, Poly(cs_));
  for (int nu = 0; nu < n; ++nu) {
    Poly c(cs_, f.truncation());
    for (int mu = 0; mu < n; ++mu) {
      if (b_[mu][nu].is_zero()) continue;
      c += f.right_derive(mu) * Scalar(b_[mu][nu]);
    }
    comp[nu] = std::move(c);
  }
  auto deg = f.homogeneous_degree();
  std::optional<int> vdeg;
  if (deg) vdeg = *deg - n_;
  return Derivation(cs_, (*pf + n_) % 2, std::move(comp), vdeg);
}

Poly ConstantSymplectic::laplacian(const Poly& f) const {
  if (!(n_ & 1)) throw Error("laplacian: form degree must be odd");
  Poly r(f.coords(), f.truncation());
  int n = cs_->size();
  for (int mu = 0; mu < n; ++mu) {
    for (int nu = 0; nu < n; ++nu) {
      if (b_[mu][nu].is_zero()) continue;
      GRat c = b_[mu][nu] / GRat(2);
      if (cs_->parity(mu)) c = -c;
      r += f.left_derive(nu).left_derive(mu) * Scalar(c);
    }
  }
  return r;
}

CheckReport check_master_equation(const ConstantSymplectic& sp, const Poly& s,
                                  const std::string& name) {
  Timer t;
  CheckReport rep;
  rep.check = name;
  Poly r = sp.poisson_bracket(s, s);
  rep.status = r.is_zero() ? Status::pass : Status::fail;
  fill_residual(rep, r);
  if (s.truncation() != Poly::kNoTrunc) rep.verified_order = s.truncation();
  rep.timing_ms = t.ms();
  return rep;
}

CheckReport check_quantum_master_equation(const ConstantSymplectic& sp,
                                          const Poly& s,
                                          const std::string& name) {
  Timer t;
  CheckReport rep;
  rep.check = name;
  Poly r = sp.poisson_bracket(s, s) -
           sp.laplacian(s) * (Scalar(2) * Scalar::i() * Scalar::hbar());
  rep.status = r.is_zero() ? Status::pass : Status::fail;
  fill_residual(rep, r);
  int max_h = r.is_zero() ? s.max_hbar_degree() + 1 : r.max_hbar_degree();
  rep.note("hbar orders checked: 0.." + std::to_string(max_h));
  if (s.truncation() != Poly::kNoTrunc) rep.verified_order = s.truncation();
  rep.timing_ms = t.ms();
  return rep;
}

}  // namespace gbv
