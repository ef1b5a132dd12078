#include "gbv/transgress.hpp"

#include <string>

namespace gbv {

std::vector<Poly> darboux_primitive(const ConstantSymplectic& sp) {
  const auto& cs = sp.coords();
  const auto& omega = sp.form_matrix();
  int n = cs->size();
  std::vector<Poly> alpha(n, Poly(cs));
  for (int nu = 0; nu < n; ++nu)
    for (int mu = 0; mu < n; ++mu) {
      if (omega[mu][nu].is_zero()) continue;
      alpha[nu] = alpha[nu] + Poly::coordinate(cs, mu) *
                                  Scalar(omega[mu][nu] * GRat(1, 2));
    }
  return alpha;
}

CoordsPtr psm_coords(int m) {
  std::vector<GradedCoordinate> list;
  for (int i = 0; i < m; ++i)
    list.push_back({"x" + std::to_string(i + 1), 0, Kind::base});
  for (int i = 0; i < m; ++i)
    list.push_back({"p" + std::to_string(i + 1), 1, Kind::base});
  return CoordinateSystem::make(list);
}

TargetSpec build_psm_target(CoordsPtr coords,
                            const std::vector<std::vector<Poly>>& pi) {
  int nt = coords->size();
  if (nt % 2) throw Error("poisson target: coordinate count must be even");
  int m = nt / 2;
  for (int i = 0; i < m; ++i)
    if (coords->degree(i) != 0 || coords->degree(m + i) != 1)
      throw Error("poisson target: expected degrees (0,...,0,1,...,1)");
  if (int(pi.size()) != m) throw Error("poisson target: bivector size mismatch");
  for (int i = 0; i < m; ++i) {
    if (int(pi[i].size()) != m)
      throw Error("poisson target: bivector size mismatch");
    for (int j = 0; j < m; ++j) {
      if (!(pi[i][j] + pi[j][i]).is_zero())
        throw Error("poisson target: bivector must be antisymmetric");
      for (const auto& [mo, c] : pi[i][j].terms())
        for (int k = m; k < nt; ++k)
          if (mo.exp(k))
            throw Error("poisson target: bivector entries must depend on the "
                        "base coordinates only");
    }
  }

  std::vector<std::tuple<std::string, std::string, GRat>> pairs;
  for (int i = 0; i < m; ++i)
    pairs.push_back({coords->name(i), coords->name(m + i), GRat(1)});
  auto sp = ConstantSymplectic::from_pairs(coords, 1, pairs);

  Poly theta(coords);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      if (pi[i][j].is_zero()) continue;
      theta = theta + pi[i][j] * Poly::coordinate(coords, m + i) *
                          Poly::coordinate(coords, m + j) * Scalar(GRat(1, 2));
    }

  CheckReport cert = check_master_equation(sp, theta, "target-cme");
  return TargetSpec{coords, sp, theta, darboux_primitive(sp), cert};
}

LieStructure sl2_structure() {
  LieStructure g{{"h", "e", "f"},
                 std::vector<std::vector<std::vector<GRat>>>(
                     3, std::vector<std::vector<GRat>>(3, std::vector<GRat>(3)))};
  g.c[0][1][1] = GRat(2);
  g.c[1][0][1] = GRat(-2);
  g.c[0][2][2] = GRat(-2);
  g.c[2][0][2] = GRat(2);
  g.c[1][2][0] = GRat(1);
  g.c[2][1][0] = GRat(-1);
  return g;
}

LieStructure so3_structure() {
  LieStructure g{{"l1", "l2", "l3"},
                 std::vector<std::vector<std::vector<GRat>>>(
                     3, std::vector<std::vector<GRat>>(3, std::vector<GRat>(3)))};
  for (int i = 0; i < 3; ++i) {
    int j = (i + 1) % 3, k = (i + 2) % 3;
    g.c[i][j][k] = GRat(1);
    g.c[j][i][k] = GRat(-1);
  }
  return g;
}

LieStructure abelian_structure(int m) {
  LieStructure g;
  for (int i = 0; i < m; ++i) g.names.push_back(std::to_string(i + 1));
  g.c.assign(m, std::vector<std::vector<GRat>>(m, std::vector<GRat>(m)));
  return g;
}

LieStructure broken_sl2_structure() {
  LieStructure g = sl2_structure();
  // deform [e,f] = h + e: antisymmetry survives, the Jacobi identity fails
  g.c[1][2][1] = GRat(1);
  g.c[2][1][1] = GRat(-1);
  return g;
}

CoordsPtr bf_coords(const std::vector<std::string>& gens, int d) {
  std::vector<GradedCoordinate> list;
  for (const auto& gname : gens) list.push_back({"x" + gname, 1, Kind::base});
  for (const auto& gname : gens)
    list.push_back({"xs" + gname, d - 2, Kind::base});
  return CoordinateSystem::make(list);
}

TargetSpec build_bf_target(const LieStructure& g, int d) {
  int m = g.size();
  if (m == 0) throw Error("bf target: empty structure");
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        if (!(g.c[i][j][k] + g.c[j][i][k]).is_zero())
          throw Error("bf target: structure constants must be antisymmetric");
  auto coords = bf_coords(g.names, d);
  std::vector<std::tuple<std::string, std::string, GRat>> pairs;
  for (int i = 0; i < m; ++i)
    pairs.push_back({coords->name(i), coords->name(m + i), GRat(1)});
  auto sp = ConstantSymplectic::from_pairs(coords, d - 1, pairs);

  Poly theta(coords);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        if (g.c[i][j][k].is_zero()) continue;
        theta = theta + Poly::coordinate(coords, m + k) *
                            Poly::coordinate(coords, i) *
                            Poly::coordinate(coords, j) *
                            Scalar(g.c[i][j][k] * GRat(1, 2));
      }

  CheckReport cert = check_master_equation(sp, theta, "target-cme");
  return TargetSpec{coords, sp, theta, darboux_primitive(sp), cert};
}

Superfields::Superfields(CoordsPtr target, const SourceModel* model,
                         std::vector<bool> is_field,
                         std::vector<Kind> component_kind, int trunc)
    : target_(std::move(target)),
      model_(model),
      is_field_(std::move(is_field)),
      trunc_(trunc) {
  int nt = target_->size();
  if (int(is_field_.size()) != nt || int(component_kind.size()) != nt)
    throw Error("superfields: flag count does not match the target");
  std::vector<GradedCoordinate> list;
  param_idx_.assign(nt, -1);
  comp_idx_.assign(nt, {});
  for (int mu = 0; mu < nt; ++mu) {
    if (is_field_[mu]) continue;
    param_idx_[mu] = int(list.size());
    list.push_back(
        {target_->name(mu), target_->degree(mu), target_->kind(mu)});
    origin_.push_back({mu, -1});
  }
  for (int mu = 0; mu < nt; ++mu) {
    if (!is_field_[mu]) continue;
    comp_idx_[mu].assign(model_->size(), -1);
    for (int a = 0; a < model_->size(); ++a) {
      comp_idx_[mu][a] = int(list.size());
      list.push_back({target_->name(mu) + "_" + model_->basis_name(a),
                      target_->degree(mu) - model_->degree(a),
                      component_kind[mu]});
      origin_.push_back({mu, a});
    }
  }
  fields_ = CoordinateSystem::make(list);
  for (int mu = 0; mu < nt; ++mu) {
    ModelPoly s(model_, fields_, trunc_);
    if (is_field_[mu]) {
      for (int a = 0; a < model_->size(); ++a)
        s += ModelPoly::pure(
            model_, a, Poly::coordinate(fields_, comp_idx_[mu][a], trunc_));
    } else {
      s += ModelPoly::pure(
          model_, 0, Poly::coordinate(fields_, param_idx_[mu], trunc_));
    }
    sf_.push_back(s);
  }
}

Superfields::Superfields(CoordsPtr target, const SourceModel* model)
    : Superfields(target, model, std::vector<bool>(target->size(), true),
                  std::vector<Kind>(target->size(), Kind::base)) {}

int Superfields::component_index(int mu, int a) const {
  if (!is_field_.at(mu)) return -1;
  return comp_idx_.at(mu).at(a);
}

int Superfields::parameter_index(int mu) const { return param_idx_.at(mu); }

ModelPoly Superfields::expand(const Poly& expr) const {
  if (expr.coords().get() != target_.get())
    throw Error("superfields: expression lives on a different system");
  const int K = model_->size();
  const int nf = fields_->size();

  // nonzero structure constants of the model product, gathered once
  std::vector<std::vector<std::vector<std::pair<int, GRat>>>> prods(
      K, std::vector<std::vector<std::pair<int, GRat>>>(K));
  for (int a = 0; a < K; ++a)
    for (int b = 0; b < K; ++b)
      for (int c = 0; c < K; ++c) {
        GRat v = model_->mul(a, b, c);
        if (!v.is_zero()) prods[a][b].push_back({c, v});
      }

  // Expands term by term, walking the coordinate factors left to right and
  // tracking the partial products (field monomial, model basis index) with
  // their rational weights.  Equivalent to multiplying out the superfields
  // with ModelPoly arithmetic, but without the intermediate allocations,
  // which dominate on large inputs.
  using Key = std::pair<int, Monomial>;  // (basis index, field monomial)
  std::vector<std::map<Monomial, Scalar>> out(K);

  auto emit = [&](std::map<Key, GRat>& next, int basis, Monomial mo, int idx,
                  GRat w) {
    if (w.is_zero()) return;
    if (fields_->odd(idx)) {
      if (mo.exp(idx)) return;  // odd square
      int passed = 0;
      for (int i = idx + 1; i < nf; ++i)
        if (fields_->odd(i)) passed += mo.exp(i);
      if (passed & 1) w = GRat() - w;
    }
    mo.set_exp(idx, mo.exp(idx) + 1);
    if (fields_->kind(idx) == Kind::fiber) {
      int fd = 0;
      for (int i = 0; i < nf; ++i)
        if (fields_->kind(i) == Kind::fiber) fd += mo.exp(i);
      if (fd > trunc_) return;
    }
    auto [it, fresh] = next.emplace(Key{basis, std::move(mo)}, w);
    if (!fresh) {
      it->second += w;
      if (it->second.is_zero()) next.erase(it);
    }
  };

  for (const auto& [mo, c] : expr.terms()) {
    std::map<Key, GRat> states;
    states[{0, Monomial(nf)}] = GRat(1);
    for (int mu = 0; mu < target_->size() && !states.empty(); ++mu)
      for (int k = 0; k < mo.exp(mu) && !states.empty(); ++k) {
        std::map<Key, GRat> next;
        for (const auto& [key, w] : states) {
          int pa = model_->parity(key.first);
          if (!is_field_[mu]) {
            int idx = param_idx_[mu];
            GRat w2 = (pa && fields_->odd(idx)) ? GRat() - w : w;
            emit(next, key.first, key.second, idx, w2);
          } else {
            for (int b = 0; b < K; ++b) {
              if (prods[key.first][b].empty()) continue;
              int idx = comp_idx_[mu][b];
              GRat w2 = (pa && fields_->odd(idx)) ? GRat() - w : w;
              for (const auto& [cc, sc] : prods[key.first][b])
                emit(next, cc, key.second, idx, w2 * sc);
            }
          }
        }
        states = std::move(next);
      }
    for (const auto& [key, w] : states) {
      Scalar s = c * Scalar(w);
      auto [it, fresh] = out[key.first].emplace(key.second, s);
      if (!fresh) {
        it->second += s;
        if (it->second.is_zero()) out[key.first].erase(it);
      }
    }
  }

  ModelPoly acc(model_, fields_, trunc_);
  for (int a = 0; a < K; ++a) {
    if (out[a].empty()) continue;
    Poly f(fields_, trunc_);
    for (const auto& [mo, s] : out[a]) f.add_term(mo, s);
    if (!f.is_zero()) acc += ModelPoly::pure(model_, a, f);
  }
  return acc;
}

Poly Superfields::integrate(const Poly& expr) const {
  return expand(expr).integrate();
}

Poly Superfields::transgress(const Poly& expr) const {
  Poly r = integrate(expr);
  return (model_->dim() % 2) ? -r : r;
}

ConstantSymplectic transgressed_symplectic(
    const std::vector<std::vector<GRat>>& target_form, const Superfields& sf) {
  const auto& fcs = sf.fields();
  const auto* model = sf.model();
  auto pairing = model->poincare_pairing();
  const int nf = fcs->size();
  const int d = model->dim();
  std::vector<int> comp;
  for (int i = 0; i < nf; ++i)
    if (sf.origin(i).second >= 0) comp.push_back(i);

  std::vector<std::vector<GRat>> w(nf, std::vector<GRat>(nf));
  for (int i : comp)
    for (int j : comp) {
      auto [mu, a] = sf.origin(i);
      auto [nu, b] = sf.origin(j);
      GRat v = target_form[mu][nu] * pairing[a][b];
      if (v.is_zero()) continue;
      int neg = d % 2;  // (-1)^d
      if (model->parity(a) && (fcs->degree(j) % 2 + 2) % 2) neg ^= 1;
      w[i][j] = neg ? GRat() - v : v;
    }

  const int nc = int(comp.size());
  std::vector<std::vector<GRat>> wb(nc, std::vector<GRat>(nc));
  for (int i = 0; i < nc; ++i)
    for (int j = 0; j < nc; ++j) wb[i][j] = w[comp[i]][comp[j]];
  auto bb = invert_matrix(wb);
  std::vector<std::vector<GRat>> b(nf, std::vector<GRat>(nf));
  for (int i = 0; i < nc; ++i)
    for (int j = 0; j < nc; ++j) b[comp[i]][comp[j]] = bb[i][j];
  return ConstantSymplectic::from_bracket_matrix(fcs, -1, std::move(b),
                                                 nc == nf);
}

FiniteBVTheory transgress(const TargetSpec& target, const SourceModel& model) {
  if (model.dim() != target.dim())
    throw Error("transgression requires a source model of dimension " +
                std::to_string(target.dim()) + ", got " + model.name());
  Superfields sf(target.coords, &model);
  auto sp = transgressed_symplectic(target.sp.form_matrix(), sf);

  Poly kin(sf.fields());
  for (int nu = 0; nu < target.coords->size(); ++nu) {
    if (target.alpha.at(nu).is_zero()) continue;
    ModelPoly t = sf.expand(target.alpha[nu]) *
                  sf.superfield(nu).differential();
    kin = kin + t.integrate();
  }
  Poly inter = sf.transgress(target.theta);
  Poly action = kin + inter;
  CheckReport cert = check_master_equation(sp, action, "cme");

  FiniteBVTheory th{sf.fields(), {}, sp, kin, inter, action, cert};
  for (int i = 0; i < sf.fields()->size(); ++i)
    th.field_of.push_back(sf.origin(i));
  return th;
}

GlobalBVTheory formal_global_action(const TargetSpec& target,
                                    const SourceModel& model,
                                    const FormalExpMap& em, int order) {
  const auto& tc = target.coords;
  const int nt = tc->size();
  const int n = target.form_degree();
  if (nt % 2)
    throw Error("formal global action requires a split target");
  const int m = nt / 2;
  for (int i = 0; i < m; ++i)
    if (tc->degree(i) != 0 || tc->degree(m + i) != n)
      throw Error("formal global action requires a split target");
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      GRat want = (i == j) ? GRat(1) : GRat();
      if (!(target.sp.bracket_entry(i, m + j) == want) ||
          !target.sp.bracket_entry(i, j).is_zero() ||
          !target.sp.bracket_entry(m + i, m + j).is_zero())
        throw Error("formal global action requires split Darboux pairs");
    }
  if (model.dim() != target.dim())
    throw Error("formal global action: source model dimension mismatch");
  const auto& fc = em.ctx();
  if (fc.dim != m || !fc.params.empty())
    throw Error("formal global action: exponential map does not match the "
                "target base");
  if (em.order() < order)
    throw Error("formal global action: exponential map truncated below the "
                "requested order");

  // extended chart: background x, odd dx, fiber displacement q, momentum B
  std::vector<GradedCoordinate> ext;
  for (int l = 0; l < m; ++l)
    ext.push_back({"x" + std::to_string(l + 1), 0, Kind::base});
  for (int l = 0; l < m; ++l)
    ext.push_back({"dx" + std::to_string(l + 1), 1, Kind::base});
  for (int j = 0; j < m; ++j)
    ext.push_back({"q" + std::to_string(j + 1), 0, Kind::fiber});
  for (int j = 0; j < m; ++j)
    ext.push_back({"B" + std::to_string(j + 1), n, Kind::base});
  auto ecs = CoordinateSystem::make(ext);

  std::vector<Poly> lift_images;
  for (int l = 0; l < m; ++l)
    lift_images.push_back(Poly::coordinate(ecs, l, order));
  for (int l = 0; l < m; ++l)
    lift_images.push_back(Poly::coordinate(ecs, m + l, order));
  for (int j = 0; j < m; ++j)
    lift_images.push_back(Poly::coordinate(ecs, 2 * m + j, order));
  auto lift = [&](const Poly& f) {
    return f.substitute(lift_images, ecs, order);
  };

  auto jinv = em.inverse_fiber_jacobian();
  std::vector<Poly> timages;
  for (int i = 0; i < m; ++i) timages.push_back(lift(em.phi(i)));
  for (int i = 0; i < m; ++i) {
    Poly acc(ecs, order);
    for (int j = 0; j < m; ++j)
      acc = acc + lift(jinv[j][i]) * Poly::coordinate(ecs, 3 * m + j, order);
    timages.push_back(acc);
  }
  Poly theta_hat = target.theta.substitute(timages, ecs, order);

  ConnectionOneForm conn = ConnectionOneForm::from_exp_map(em);
  Poly sr_integrand(ecs, order);
  for (int l = 0; l < m; ++l)
    for (int j = 0; j < m; ++j) {
      const Poly& rlj = conn.component(l, j);
      if (rlj.is_zero()) continue;
      sr_integrand = sr_integrand +
                     lift(rlj) * Poly::coordinate(ecs, 3 * m + j, order) *
                         Poly::coordinate(ecs, m + l, order);
    }

  std::vector<bool> isf(4 * m, false);
  std::vector<Kind> kind(4 * m, Kind::base);
  for (int j = 0; j < m; ++j) {
    isf[2 * m + j] = true;
    kind[2 * m + j] = Kind::fiber;
    isf[3 * m + j] = true;
  }
  auto source = std::make_shared<const SourceModel>(model);
  auto sf = std::make_shared<const Superfields>(ecs, source.get(), isf, kind,
                                                order);

  // constant symplectic pairing of the fiber chart, embedded into the
  // extended index space
  std::vector<GradedCoordinate> aux;
  for (int j = 0; j < m; ++j)
    aux.push_back({"q" + std::to_string(j + 1), 0, Kind::base});
  for (int j = 0; j < m; ++j)
    aux.push_back({"B" + std::to_string(j + 1), n, Kind::base});
  auto acs = CoordinateSystem::make(aux);
  std::vector<std::tuple<std::string, std::string, GRat>> pairs;
  for (int j = 0; j < m; ++j)
    pairs.push_back({acs->name(j), acs->name(m + j), GRat(1)});
  auto aux_sp = ConstantSymplectic::from_pairs(acs, n, pairs);
  const auto& aw = aux_sp.form_matrix();
  std::vector<std::vector<GRat>> tform(4 * m, std::vector<GRat>(4 * m));
  for (int i = 0; i < 2 * m; ++i)
    for (int j = 0; j < 2 * m; ++j) tform[2 * m + i][2 * m + j] = aw[i][j];
  auto gsp = transgressed_symplectic(tform, *sf);

  std::vector<std::vector<GRat>> cb(4 * m, std::vector<GRat>(4 * m));
  for (int i = 0; i < 2 * m; ++i)
    for (int j = 0; j < 2 * m; ++j)
      cb[2 * m + i][2 * m + j] = aux_sp.bracket_entry(i, j);
  auto chart_sp = ConstantSymplectic::from_bracket_matrix(ecs, n, cb, false);

  Poly kin(sf->fields(), order);
  for (int j = 0; j < m; ++j) {
    ModelPoly t = sf->superfield(3 * m + j) *
                  sf->superfield(2 * m + j).differential();
    kin = kin + t.integrate();
  }
  Poly inter_integrand = (model.dim() % 2) ? -theta_hat : theta_hat;
  Poly aksz = kin + sf->integrate(inter_integrand);
  Poly connection_term = sf->integrate(sr_integrand);

  GlobalBVTheory th{sf->fields(),
                    gsp,
                    aksz,
                    connection_term,
                    aksz + connection_term,
                    order,
                    m,
                    {},
                    ecs,
                    chart_sp,
                    inter_integrand,
                    sr_integrand,
                    sf,
                    source};
  for (int l = 0; l < m; ++l)
    th.dx_indices.push_back(sf->parameter_index(m + l));
  return th;
}

Derivation GlobalBVTheory::base_differential() const {
  std::vector<Poly> comp(ring->size(), Poly(ring, order));
  for (int l = 0; l < base_dim; ++l)
    comp[l] = Poly::coordinate(ring, dx_indices[l], order);
  return Derivation(ring, 1, comp, 1);
}

Derivation GlobalBVTheory::chart_base_differential() const {
  std::vector<Poly> comp(chart->size(), Poly(chart, order));
  for (int l = 0; l < base_dim; ++l)
    comp[l] = Poly::coordinate(chart, base_dim + l, order);
  return Derivation(chart, 1, comp, 1);
}

GlobalBVTheory GlobalBVTheory::without_connection() const {
  GlobalBVTheory s = *this;
  s.connection = Poly(ring, order);
  s.action = s.aksz;
  s.integrand_connection = Poly(chart, order);
  return s;
}

CheckReport check_dcme(const GlobalBVTheory& th) {
  CheckReport rep;
  rep.check = "dcme";
  Timer t;
  Poly resid;
  if (th.expansion && !th.source->has_differential() &&
      th.source->dim() % 2 == 0) {
    // Without a source differential the action is the superfield integral
    // of the chart integrand, and for even-dimensional sources the integral
    // takes the chart bracket to the field bracket, so the residual can be
    // assembled on the chart and expanded once.  The top fiber order of the
    // residual is never reported (it is cut off by the truncation), so the
    // bracket accumulates only up to order-1; the derivative along a fiber
    // coordinate already lost one order, making its re-truncation lossless.
    const int keep = th.order > 0 ? th.order - 1 : 0;
    Poly l = th.integrand_aksz + th.integrand_connection;
    Poly br(th.chart, keep);
    for (int mu = 0; mu < th.chart->size(); ++mu)
      for (int nu = 0; nu < th.chart->size(); ++nu) {
        GRat b = th.chart_sp.bracket_entry(mu, nu);
        if (b.is_zero()) continue;
        Poly df = l.right_derive(mu);
        Poly dg = l.left_derive(nu);
        if (th.chart->kind(mu) == Kind::fiber)
          df = df.truncated(keep);
        else if (th.chart->kind(nu) == Kind::fiber)
          dg = dg.truncated(keep);
        br = br + df * Scalar(b) * dg;
      }
    Poly r = th.chart_base_differential().apply(l).truncated(keep) +
             br * Scalar(GRat(1, 2));
    resid = th.expansion->integrate(r);
  } else {
    Derivation dx = th.base_differential();
    resid = dx.apply(th.action) + th.sp.poisson_bracket(th.action, th.action) *
                                      Scalar(GRat(1, 2));
  }
  bool ok = true;
  for (int fd = 0; fd <= 2; ++fd) {
    Poly part = resid.filter([&](const Monomial& mo) {
      int c = 0;
      for (int l : th.dx_indices) c += mo.exp(l);
      return c == fd;
    });
    for (int k = 0; k + 1 <= th.order; ++k) {
      Poly pk = part.fiber_component(k);
      bool zero = pk.is_zero();
      rep.note("dx^" + std::to_string(fd) + " fiber order " +
               std::to_string(k) + ": " + (zero ? "vanishes" : "nonzero"));
      if (!zero) {
        ok = false;
        for (const auto& lt : pk.leading_terms(3)) rep.residual.push_back(lt);
      }
    }
  }
  rep.status = ok ? Status::pass : Status::fail;
  rep.verified_order = th.order - 1;
  rep.timing_ms = t.ms();
  return rep;
}

}  // namespace gbv
