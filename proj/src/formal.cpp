#include "gbv/formal.hpp"

#include <algorithm>
#include <map>

namespace gbv {

namespace {

void fill_residual(CheckReport& rep, const Poly& r) {
  rep.residual = r.leading_terms(10);
}

std::vector<std::vector<Poly>> mat_mul(
    const std::vector<std::vector<Poly>>& a,
    const std::vector<std::vector<Poly>>& b) {
  int n = int(a.size());
  std::vector<std::vector<Poly>> r(n, std::vector<Poly>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Poly s;
      for (int k = 0; k < n; ++k) s += a[i][k] * b[k][j];
      r[i][j] = std::move(s);
    }
  return r;
}

}  // namespace

FormalContext FormalContext::make(int dim, std::vector<std::string> params) {
  if (dim < 1) throw Error("formal context: dimension must be positive");
  std::vector<GradedCoordinate> co;
  for (int l = 1; l <= dim; ++l)
    co.push_back({"x" + std::to_string(l), 0, Kind::base});
  for (const auto& p : params) co.push_back({p, 0, Kind::base});
  for (int l = 1; l <= dim; ++l)
    co.push_back({"dx" + std::to_string(l), 1, Kind::base});
  for (int j = 1; j <= dim; ++j)
    co.push_back({"p" + std::to_string(j), 0, Kind::fiber});
  FormalContext ctx;
  ctx.dim = dim;
  ctx.params = std::move(params);
  ctx.cs = CoordinateSystem::make(std::move(co));
  return ctx;
}

int FormalContext::form_degree(const Monomial& m) const {
  int d = 0;
  for (int l = 0; l < dim; ++l) d += m.exp(dx_index(l));
  return d;
}

int FormalContext::fiber_degree(const Monomial& m) const {
  int d = 0;
  for (int j = 0; j < dim; ++j) d += m.exp(p_index(j));
  return d;
}

bool FormalContext::base_only(const Poly& f) const {
  for (const auto& [m, c] : f.terms())
    if (form_degree(m) || fiber_degree(m)) return false;
  return true;
}

FormalExpMap::FormalExpMap(FormalContext ctx, int order,
                           const std::vector<ExpCoeff>& coeffs)
    : ctx_(std::move(ctx)), order_(order) {
  int m = ctx_.dim;
  if (order_ < 2) throw Error("exp map: order must be at least 2");
  std::map<std::pair<int, std::vector<int>>, Poly> tens;
  for (const auto& e : coeffs) {
    if (e.i < 0 || e.i >= m) throw Error("exp map: target index out of range");
    if (int(e.lower.size()) < 2)
      throw Error("exp map: tensor arity must be at least 2");
    if (int(e.lower.size()) > order_)
      throw Error("exp map: tensor arity exceeds the order");
    for (int j : e.lower)
      if (j < 0 || j >= m) throw Error("exp map: lower index out of range");
    if (!e.c.is_zero()) {
      if (!e.c.coords()->same_as(*ctx_.cs))
        throw Error("exp map: coefficient over wrong coordinate system");
      if (!ctx_.base_only(e.c))
        throw Error("exp map: coefficient must be a base-coordinate poly");
    }
    auto key = std::make_pair(e.i, e.lower);
    std::sort(key.second.begin(), key.second.end());
    if (!tens.emplace(std::move(key), e.c).second)
      throw Error("exp map: duplicate tensor entry");
  }
  phi_.reserve(m);
  for (int i = 0; i < m; ++i)
    phi_.push_back(ctx_.x(i, order_) + ctx_.p(i, order_));
  for (const auto& [key, c] : tens) {
    if (c.is_zero()) continue;
    const auto& [i, lo] = key;
    // symmetric tensor contracted with p^{j1}..p^{jk}/k! collapses to
    // 1 / prod(multiplicities!) per distinct monomial
    std::map<int, int> cnt;
    for (int j : lo) cnt[j] += 1;
    long denom = 1;
    for (const auto& [j, e] : cnt)
      for (int a = 2; a <= e; ++a) denom *= a;
    Poly mono = Poly::one(ctx_.cs).with_truncation(order_);
    for (int j : lo) mono *= ctx_.p(j, order_);
    if (mono.is_zero()) continue;  // arity beyond the truncation
    phi_[i] += c.with_truncation(order_) * mono * Scalar(GRat(1, denom));
  }
}

std::vector<std::vector<Poly>> FormalExpMap::fiber_jacobian() const {
  int m = ctx_.dim;
  std::vector<std::vector<Poly>> j(m, std::vector<Poly>(m));
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < m; ++k)
      j[i][k] = phi_[i].left_derive(ctx_.p_index(k));
  return j;
}

std::vector<std::vector<Poly>> FormalExpMap::inverse_fiber_jacobian() const {
  return invert_unipotent_matrix(fiber_jacobian(), order_);
}

Poly FormalExpMap::derivative_in(const std::string& param, int i) const {
  int idx = ctx_.cs->index(param);
  bool listed = false;
  for (size_t k = 0; k < ctx_.params.size(); ++k)
    if (idx == ctx_.param_index(int(k))) listed = true;
  if (!listed) throw Error("exp map: " + param + " is not a parameter");
  return phi_.at(i).left_derive(idx);
}

FormalExpMap random_exp_map(const FormalContext& ctx, int order, Rng& rng,
                            int max_arity, bool x_dependent) {
  std::vector<ExpCoeff> coeffs;
  int m = ctx.dim;
  int top = std::min(max_arity, order);
  for (int i = 0; i < m; ++i) {
    std::vector<int> tuple;
    // all nondecreasing tuples of each arity
    auto emit = [&](auto&& self, int arity, int lo) -> void {
      if (arity == 0) {
        Poly c = Poly::constant(ctx.cs, Scalar(rng.rational()));
        if (x_dependent)
          for (int l = 0; l < m; ++l)
            c += ctx.x(l) * Scalar(rng.rational());
        coeffs.push_back({i, tuple, std::move(c)});
        return;
      }
      for (int j = lo; j < m; ++j) {
        tuple.push_back(j);
        self(self, arity - 1, j);
        tuple.pop_back();
      }
    };
    for (int k = 2; k <= top; ++k) emit(emit, k, 0);
  }
  return FormalExpMap(ctx, order, coeffs);
}

std::vector<std::vector<Poly>> invert_unipotent_matrix(
    const std::vector<std::vector<Poly>>& m, int order) {
  int n = int(m.size());
  CoordsPtr cs;
  for (const auto& row : m)
    for (const auto& e : row)
      if (e.coords()) cs = e.coords();
  if (!cs) throw Error("invert_unipotent_matrix: no coordinate system");
  Poly one = Poly::one(cs).with_truncation(order);

  Poly zero(cs, order);
  std::vector<std::vector<Poly>> a(n, std::vector<Poly>(n, zero));
  std::vector<std::vector<Poly>> inv(n, std::vector<Poly>(n, zero));
  std::vector<std::vector<Poly>> term(n, std::vector<Poly>(n, zero));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      a[i][j] = m[i][j].with_truncation(order) - (i == j ? one : Poly(cs));
      if (!a[i][j].is_zero() && a[i][j].fiber_component(0) != Poly(cs))
        throw Error("invert_unipotent_matrix: leading part is not identity");
    }
    inv[i][i] = one;
    term[i][i] = one;
  }
  for (int k = 1; k <= order; ++k) {
    term = mat_mul(term, a);
    bool live = false;
    for (int i = 0; i < n && !live; ++i)
      for (int j = 0; j < n && !live; ++j) live = !term[i][j].is_zero();
    if (!live) break;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (k & 1)
          inv[i][j] -= term[i][j];
        else
          inv[i][j] += term[i][j];
  }
  return inv;
}

Poly poly_det(const std::vector<std::vector<Poly>>& m) {
  int n = int(m.size());
  if (n == 1) return m[0][0];
  Poly det;
  for (int c = 0; c < n; ++c) {
    if (m[0][c].is_zero()) continue;
    std::vector<std::vector<Poly>> sub(n - 1, std::vector<Poly>(n - 1));
    for (int i = 1; i < n; ++i) {
      int jj = 0;
      for (int j = 0; j < n; ++j) {
        if (j == c) continue;
        sub[i - 1][jj++] = m[i][j];
      }
    }
    Poly cof = m[0][c] * poly_det(sub);
    if (c & 1)
      det -= cof;
    else
      det += cof;
  }
  return det;
}

ConnectionOneForm::ConnectionOneForm(FormalContext ctx, int order,
                                     std::vector<std::vector<Poly>> comp)
    : ctx_(std::move(ctx)), order_(order), comp_(std::move(comp)) {
  int m = ctx_.dim;
  if (int(comp_.size()) != m)
    throw Error("connection: need one component row per base direction");
  Poly mone = -Poly::one(ctx_.cs).with_truncation(order_);
  for (int l = 0; l < m; ++l) {
    if (int(comp_[l].size()) != m)
      throw Error("connection: component row has wrong length");
    for (int j = 0; j < m; ++j) {
      const Poly& c = comp_[l][j];
      if (c.is_zero()) {
        if (l == j) throw Error("connection: R(x,0) must be -identity");
        continue;
      }
      if (!c.coords()->same_as(*ctx_.cs))
        throw Error("connection: component over wrong coordinate system");
      for (const auto& [mm, cc] : c.terms())
        if (ctx_.form_degree(mm))
          throw Error("connection: components cannot carry dx factors");
      Poly lead = c.fiber_component(0);
      if (lead != (l == j ? mone : Poly(ctx_.cs)))
        throw Error("connection: R(x,0) must be -identity");
    }
  }
}

ConnectionOneForm ConnectionOneForm::from_exp_map(const FormalExpMap& em) {
  const FormalContext& ctx = em.ctx();
  int m = ctx.dim, order = em.order();
  auto jinv = em.inverse_fiber_jacobian();
  std::vector<std::vector<Poly>> comp(m, std::vector<Poly>(m));
  for (int l = 0; l < m; ++l) {
    std::vector<Poly> dphi(m);
    for (int k = 0; k < m; ++k)
      dphi[k] = em.phi(k).left_derive(ctx.x_index(l));
    for (int j = 0; j < m; ++j) {
      Poly r;
      for (int k = 0; k < m; ++k) r += dphi[k] * jinv[j][k];
      comp[l][j] = -r;
    }
  }
  return ConnectionOneForm(ctx, order, std::move(comp));
}

Derivation ConnectionOneForm::as_derivation() const {
  int m = ctx_.dim;
  std::vector<Poly> comp(ctx_.cs->size(), Poly(ctx_.cs));
  for (int j = 0; j < m; ++j) {
    Poly c(ctx_.cs, order_);
    for (int l = 0; l < m; ++l) c += ctx_.dx(l, order_) * comp_[l][j];
    comp[ctx_.p_index(j)] = std::move(c);
  }
  return Derivation(ctx_.cs, 1, std::move(comp), 1);
}

Derivation ConnectionOneForm::direction(int l) const {
  std::vector<Poly> comp(ctx_.cs->size(), Poly(ctx_.cs));
  for (int j = 0; j < ctx_.dim; ++j) comp[ctx_.p_index(j)] = comp_[l][j];
  return Derivation(ctx_.cs, 0, std::move(comp), 0);
}

Derivation de_rham(const FormalContext& ctx) {
  std::vector<Poly> comp(ctx.cs->size(), Poly(ctx.cs));
  for (int l = 0; l < ctx.dim; ++l) comp[ctx.x_index(l)] = ctx.dx(l);
  return Derivation(ctx.cs, 1, std::move(comp), 1);
}

Poly taylor_pullback(const FormalExpMap& em, const Poly& f) {
  const FormalContext& ctx = em.ctx();
  if (!f.coords() || !f.coords()->same_as(*ctx.cs))
    throw Error("taylor_pullback: input over wrong coordinate system");
  for (const auto& [m, c] : f.terms()) {
    for (int i = ctx.dim; i < ctx.cs->size(); ++i)
      if (m.exp(i))
        throw Error("taylor_pullback: input must depend on x only");
  }
  std::vector<Poly> images;
  images.reserve(ctx.cs->size());
  for (int i = 0; i < ctx.cs->size(); ++i)
    images.push_back(i < ctx.dim ? em.phi(i)
                                 : Poly::coordinate(ctx.cs, i, em.order()));
  return f.substitute(images, ctx.cs, em.order());
}

namespace {

// collect the p^j-components of a derivation truncated at the given order;
// returns the first nonzero one for reporting
bool vanish_fiber_components(const FormalContext& ctx, const Derivation& d,
                             int order, CheckReport& rep) {
  for (int j = 0; j < ctx.dim; ++j) {
    Poly c = d.component(ctx.p_index(j)).with_truncation(order);
    if (!c.is_zero()) {
      rep.status = Status::fail;
      rep.note("first nonzero component: p" + std::to_string(j + 1));
      fill_residual(rep, c);
      return false;
    }
  }
  return true;
}

}  // namespace

CheckReport check_flatness(const ConnectionOneForm& r) {
  Timer t;
  CheckReport rep;
  rep.check = "flatness";
  int no = r.order() - 1;
  rep.verified_order = no;
  Derivation rr = r.as_derivation();
  Derivation f =
      lie_bracket(de_rham(r.ctx()), rr) + lie_bracket(rr, rr) * Scalar(1, 2);
  if (vanish_fiber_components(r.ctx(), f, no, rep)) rep.status = Status::pass;
  rep.timing_ms = t.ms();
  return rep;
}

CheckReport check_d_closed_section(const ConnectionOneForm& r,
                                   const Poly& sigma) {
  Timer t;
  CheckReport rep;
  rep.check = "d_closed";
  int no = r.order() - 1;
  rep.verified_order = no;
  Poly resid = de_rham(r.ctx()).apply(sigma) + r.as_derivation().apply(sigma);
  resid = resid.with_truncation(no);
  rep.status = resid.is_zero() ? Status::pass : Status::fail;
  fill_residual(rep, resid);
  rep.timing_ms = t.ms();
  return rep;
}

CheckReport check_d_closed(const ConnectionOneForm& r, const FormalExpMap& em,
                           const Poly& f) {
  return check_d_closed_section(r, taylor_pullback(em, f));
}

CheckReport homotopy_identity(const FormalContext& ctx, const Poly& sigma) {
  Timer t;
  CheckReport rep;
  rep.check = "homotopy";
  std::optional<int> fr, fs;
  for (const auto& [m, c] : sigma.terms()) {
    int rr = ctx.form_degree(m), ss = ctx.fiber_degree(m);
    if (!fr) {
      fr = rr;
      fs = ss;
    } else if (*fr != rr || *fs != ss) {
      throw Error("homotopy_identity: input not of homogeneous bidegree");
    }
  }
  int k = fr ? *fr + *fs : 0;
  Poly sig = sigma.with_truncation(Poly::kNoTrunc);

  std::vector<Poly> dc(ctx.cs->size(), Poly(ctx.cs));
  std::vector<Poly> sc(ctx.cs->size(), Poly(ctx.cs));
  for (int j = 0; j < ctx.dim; ++j) {
    dc[ctx.p_index(j)] = ctx.dx(j);
    sc[ctx.dx_index(j)] = ctx.p(j);
  }
  Derivation delta(ctx.cs, 1, std::move(dc), std::nullopt);
  Derivation dstar(ctx.cs, 1, std::move(sc), std::nullopt);

  Poly lhs = delta.apply(dstar.apply(sig)) + dstar.apply(delta.apply(sig));
  Poly resid = lhs - sig * Scalar(k);
  rep.status = resid.is_zero() ? Status::pass : Status::fail;
  rep.note("bidegree (" + std::to_string(fr ? *fr : 0) + "," +
           std::to_string(fs ? *fs : 0) + "), eigenvalue " + std::to_string(k));
  fill_residual(rep, resid);
  rep.timing_ms = t.ms();
  return rep;
}

std::pair<Derivation, CheckReport> family_generator(const FormalExpMap& em,
                                                    const std::string& param,
                                                    const Poly& f) {
  Timer t;
  const FormalContext& ctx = em.ctx();
  int m = ctx.dim, order = em.order(), no = order - 1;
  CheckReport rep;
  rep.check = "family";
  rep.verified_order = no;

  auto jinv = em.inverse_fiber_jacobian();
  std::vector<Poly> phidot(m);
  for (int k = 0; k < m; ++k) phidot[k] = em.derivative_in(param, k);

  std::vector<Poly> ccomp(ctx.cs->size(), Poly(ctx.cs));
  for (int j = 0; j < m; ++j) {
    Poly c(ctx.cs, order);
    for (int k = 0; k < m; ++k) c += jinv[j][k] * phidot[k];
    ccomp[ctx.p_index(j)] = -c;
  }
  Derivation gen(ctx.cs, 0, std::move(ccomp), 0);

  ConnectionOneForm conn = ConnectionOneForm::from_exp_map(em);
  Derivation rr = conn.as_derivation();
  int pidx = ctx.cs->index(param);

  // dR/dt - d_x C - [R, C], fiber components to order N-1
  std::vector<Poly> rdot(ctx.cs->size(), Poly(ctx.cs));
  for (int j = 0; j < m; ++j)
    rdot[ctx.p_index(j)] = rr.component(ctx.p_index(j)).left_derive(pidx);
  Derivation lhs(ctx.cs, 1, std::move(rdot), std::nullopt);
  Derivation rhs = lie_bracket(de_rham(ctx), gen) + lie_bracket(rr, gen);
  Derivation diff = lhs + (-rhs);
  bool ok = vanish_fiber_components(ctx, diff, no, rep);
  if (!ok) rep.note("variation of R does not match d_x C + [R,C]");

  // section transport: d(sigma)/dt + C(sigma) = 0
  if (ok) {
    Poly sigma = taylor_pullback(em, f);
    Poly resid =
        (sigma.left_derive(pidx) + gen.apply(sigma)).with_truncation(no);
    if (!resid.is_zero()) {
      ok = false;
      rep.status = Status::fail;
      rep.note("pullback section is not transported by the generator");
      fill_residual(rep, resid);
    }
  }
  if (ok) rep.status = Status::pass;
  rep.timing_ms = t.ms();
  return {std::move(gen), std::move(rep)};
}

FormalVolume::FormalVolume(Poly r, int n) : rho(std::move(r)), order(n) {
  if (rho.constant_term().is_zero())
    throw Error("volume: leading coefficient must be invertible");
  auto pp = rho.parity();
  if (!pp || *pp != 0) throw Error("volume: density must be even");
}

FormalVolume pullback_volume(const FormalExpMap& em) {
  return FormalVolume(poly_det(em.fiber_jacobian()).with_truncation(em.order()),
                      em.order());
}

CheckReport check_volume_compatibility(const ConnectionOneForm& r,
                                       const FormalVolume& vol) {
  Timer t;
  const FormalContext& ctx = r.ctx();
  CheckReport rep;
  rep.check = "volume";
  int no = std::min(r.order(), vol.order) - 1;
  rep.verified_order = no;
  rep.status = Status::pass;
  for (int l = 0; l < ctx.dim; ++l) {
    Poly resid = vol.rho.left_derive(ctx.x_index(l));
    for (int j = 0; j < ctx.dim; ++j) {
      resid += r.component(l, j) * vol.rho.left_derive(ctx.p_index(j));
      resid += vol.rho * r.component(l, j).left_derive(ctx.p_index(j));
    }
    resid = resid.with_truncation(no);
    if (!resid.is_zero()) {
      rep.status = Status::fail;
      rep.note("density transport fails along x" + std::to_string(l + 1));
      fill_residual(rep, resid);
      break;
    }
  }
  rep.timing_ms = t.ms();
  return rep;
}

}  // namespace gbv
