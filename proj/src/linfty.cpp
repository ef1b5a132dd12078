#include "gbv/linfty.hpp"

#include <algorithm>

namespace gbv {

namespace {

// shift sign (-1)^{j(j-1)/2 + 1} relating D_j and l_j
int sigma_sign(int j) {
  return (j * (j - 1) / 2 + 1) % 2 ? -1 : 1;
}

// decalage exponent sum_{k=1..j} (k-1) deg(e_{t_k}) on an argument tuple;
// the (k-1) weights match the tail-first order of the derivative extraction
int decalage_sign(const std::vector<int>& t, const std::vector<int>& deg) {
  int e = 0, j = int(t.size());
  for (int k = 1; k <= j; ++k) e += (k - 1) * deg[t[k - 1]];
  return ((e % 2) + 2) % 2 ? -1 : 1;
}

Poly tuple_monomial(const CoordsPtr& cs, const std::vector<int>& t) {
  Poly m = Poly::one(cs);
  for (int idx : t) m = m * Poly::coordinate(cs, idx);
  return m;
}

// [d^L_{t_1} ... d^L_{t_j} p]_0 with the rightmost derivative applied first
GRat tuple_extract(const Poly& p, const std::vector<int>& t) {
  Poly d = p;
  for (int k = int(t.size()) - 1; k >= 0; --k) d = d.left_derive(t[k]);
  Scalar s = d.constant_term();
  if (!s.is_constant())
    throw Error("L-infinity extraction met an hbar-dependent coefficient");
  return s.constant_part();
}

}  // namespace

LinftyAlgebra::LinftyAlgebra(std::vector<std::string> names,
                             std::vector<int> degrees, int max_arity)
    : names_(std::move(names)),
      degrees_(std::move(degrees)),
      max_arity_(max_arity) {
  if (names_.size() != degrees_.size())
    throw Error("L-infinity basis: names and degrees differ in length");
  if (names_.empty()) throw Error("L-infinity basis must be nonempty");
  if (max_arity_ < 1) throw Error("L-infinity max arity must be positive");
  tables_.resize(max_arity_);
}

int LinftyAlgebra::top_arity() const {
  for (int j = max_arity_; j >= 1; --j)
    if (!tables_[j - 1].empty()) return j;
  return 0;
}

int LinftyAlgebra::normalize(std::vector<int>& args) const {
  int sign = 1;
  // bubble sort, tracking the classical antisymmetry sign per adjacent swap
  for (size_t pass = 1; pass < args.size(); ++pass)
    for (size_t i = 0; i + 1 < args.size(); ++i) {
      if (args[i] <= args[i + 1]) continue;
      int pa = degrees_[args[i]] & 1, pb = degrees_[args[i + 1]] & 1;
      sign *= (pa && pb) ? 1 : -1;  // -(-1)^{|a||b|}
      std::swap(args[i], args[i + 1]);
    }
  // a repeated argument of even degree forces the value to vanish
  for (size_t i = 0; i + 1 < args.size(); ++i)
    if (args[i] == args[i + 1] && !(degrees_[args[i]] & 1)) return 0;
  return sign;
}

void LinftyAlgebra::add_bracket(const std::vector<int>& args, int out,
                                const GRat& c) {
  int j = int(args.size());
  if (j < 1 || j > max_arity_)
    throw Error("bracket arity out of range: " + std::to_string(j));
  for (int a : args)
    if (a < 0 || a >= size()) throw Error("bracket argument out of range");
  if (out < 0 || out >= size()) throw Error("bracket output out of range");
  if (c.is_zero()) return;
  int dsum = 0;
  for (int a : args) dsum += degrees_[a];
  if (degrees_[out] != dsum + 2 - j)
    throw Error("bracket entry violates the degree rule deg l_j = 2 - j");
  std::vector<int> key = args;
  int sign = normalize(key);
  if (sign == 0)
    throw Error("bracket entry on a repeated even argument must vanish");
  auto& row = tables_[j - 1][Key{key}];
  if (row.empty()) row.assign(size(), GRat());
  row[out] += sign == 1 ? c : -c;
  GRat zero;
  bool all_zero = true;
  for (const auto& v : row)
    if (v != zero) {
      all_zero = false;
      break;
    }
  if (all_zero) tables_[j - 1].erase(Key{key});
}

GRat LinftyAlgebra::bracket(const std::vector<int>& args, int out) const {
  int j = int(args.size());
  if (j < 1 || j > max_arity_) return GRat();
  std::vector<int> key = args;
  int sign = normalize(key);
  if (sign == 0) return GRat();
  auto it = tables_[j - 1].find(Key{key});
  if (it == tables_[j - 1].end()) return GRat();
  const GRat& v = it->second.at(out);
  return sign == 1 ? v : -v;
}

std::vector<GRat> LinftyAlgebra::apply(const std::vector<int>& args) const {
  std::vector<GRat> r(size());
  int j = int(args.size());
  if (j < 1 || j > max_arity_) return r;
  std::vector<int> key = args;
  int sign = normalize(key);
  if (sign == 0) return r;
  auto it = tables_[j - 1].find(Key{key});
  if (it == tables_[j - 1].end()) return r;
  for (int k = 0; k < size(); ++k)
    r[k] = sign == 1 ? it->second[k] : -it->second[k];
  return r;
}

void LinftyAlgebra::set_pairing(std::vector<std::vector<GRat>> p) {
  if (int(p.size()) != size())
    throw Error("pairing matrix size does not match the basis");
  for (const auto& row : p)
    if (int(row.size()) != size())
      throw Error("pairing matrix size does not match the basis");
  pairing_ = std::move(p);
}

int LinftyAlgebra::pairing_degree_sum() const {
  if (!has_pairing()) throw Error("no pairing attached");
  for (int a = 0; a < size(); ++a)
    for (int b = 0; b < size(); ++b)
      if (!pairing_[a][b].is_zero()) return degrees_[a] + degrees_[b];
  throw Error("pairing is identically zero");
}

void LinftyAlgebra::validate() const {
  // table keys ascending and within range; degree rule re-checked
  for (int j = 1; j <= max_arity_; ++j)
    for (const auto& [key, out] : tables_[j - 1]) {
      if (int(key.args.size()) != j)
        throw Error("bracket table key of wrong arity");
      if (!std::is_sorted(key.args.begin(), key.args.end()))
        throw Error("bracket table key not in canonical order");
      int dsum = 0;
      for (int a : key.args) dsum += degrees_[a];
      for (int k = 0; k < size(); ++k)
        if (!out[k].is_zero() && degrees_[k] != dsum + 2 - j)
          throw Error("bracket table violates the degree rule");
    }
  if (!has_pairing()) return;
  int s = pairing_degree_sum();
  for (int a = 0; a < size(); ++a)
    for (int b = 0; b < size(); ++b) {
      const GRat& v = pairing_[a][b];
      if (v.is_zero()) continue;
      if (degrees_[a] + degrees_[b] != s)
        throw Error("pairing support is not degree-homogeneous");
      int sg = (degrees_[a] & 1) && (degrees_[b] & 1) ? -1 : 1;
      GRat mirror = sg == 1 ? pairing_[b][a] : -pairing_[b][a];
      if (v != mirror) throw Error("pairing is not graded symmetric");
    }
  // cyclicity: <X_1, l_j(X_2..X_{j+1})> =
  //   (-1)^{j + j(|X_1|+|X_{j+1}|) + |X_{j+1}|(|X_1|+..+|X_j|)}
  //   <X_{j+1}, l_j(X_1..X_j)>
  int n = size();
  for (int j = 1; j <= top_arity(); ++j) {
    if (tables_[j - 1].empty()) continue;
    std::vector<int> t(j + 1, 0);
    while (true) {
      GRat lhs, rhs;
      auto l = apply(std::vector<int>(t.begin() + 1, t.end()));
      for (int k = 0; k < n; ++k)
        if (!l[k].is_zero()) lhs += pairing_[t[0]][k] * l[k];
      auto r = apply(std::vector<int>(t.begin(), t.end() - 1));
      for (int k = 0; k < n; ++k)
        if (!r[k].is_zero()) rhs += pairing_[t[j]][k] * r[k];
      int e = j + j * (degrees_[t[0]] + degrees_[t[j]]);
      for (int m = 0; m < j; ++m) e += degrees_[t[j]] * degrees_[t[m]];
      if (lhs != (((e % 2) + 2) % 2 ? -rhs : rhs))
        throw Error("pairing is not cyclic at arity " + std::to_string(j));
      int pos = j;
      while (pos >= 0 && ++t[pos] == n) t[pos--] = 0;
      if (pos < 0) break;
    }
  }
}

CoordsPtr LinftyAlgebra::shifted_coords() const {
  // the coordinate dual to a basis vector of degree g sits in degree 1 - g,
  // so that the degree rule deg l_j = 2 - j matches a degree +1 field
  std::vector<GradedCoordinate> cs;
  cs.reserve(names_.size());
  for (int i = 0; i < size(); ++i)
    cs.push_back({names_[i], 1 - degrees_[i], Kind::base});
  return CoordinateSystem::make(std::move(cs));
}

Derivation LinftyAlgebra::to_derivation() const {
  auto cs = shifted_coords();
  std::vector<Poly> comp(size(), Poly(cs));
  for (int j = 1; j <= max_arity_; ++j)
    for (const auto& [key, out] : tables_[j - 1]) {
      Poly mz = tuple_monomial(cs, key.args);
      if (mz.is_zero())
        throw Error("bracket entry on arguments whose product vanishes");
      GRat kappa = tuple_extract(mz, key.args);
      int sg = sigma_sign(j) * decalage_sign(key.args, degrees_);
      for (int k = 0; k < size(); ++k) {
        if (out[k].is_zero()) continue;
        GRat c = (sg == 1 ? out[k] : -out[k]) / kappa;
        comp[k] += mz * Scalar(c);
      }
    }
  return Derivation(cs, 1, std::move(comp), 1);
}

CheckReport LinftyAlgebra::certify_jacobi() const {
  Timer tm;
  CheckReport rep;
  rep.check = "homotopy_jacobi";
  auto q = to_derivation();
  int cut = top_arity() + 1;
  rep.status = Status::pass;
  for (int k = 0; k < size(); ++k) {
    Poly r = q.apply(q.component(k));
    Poly low = r.filter(
        [&](const Monomial& m) { return m.total_exponent() <= cut; });
    if (low.is_zero()) continue;
    rep.status = Status::fail;
    if (rep.residual.empty()) {
      rep.notes.push_back("first failing output: " + names_[k]);
      rep.residual = low.leading_terms(10);
    }
  }
  rep.verified_order = cut;
  rep.timing_ms = tm.ms();
  return rep;
}

CeComplex ce_differential(const LieStructure& f) {
  int n = f.size();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        if (f.c[i][j][k] != -f.c[j][i][k])
          throw Error("structure constants must be antisymmetric");
  std::vector<GradedCoordinate> gc;
  for (const auto& nm : f.names) gc.push_back({nm, 1, Kind::base});
  auto cs = CoordinateSystem::make(std::move(gc));
  std::vector<Poly> comp(n, Poly(cs));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (f.c[i][j][k].is_zero()) continue;
        comp[k] += Poly::coordinate(cs, i) * Poly::coordinate(cs, j) *
                   Scalar(f.c[i][j][k] * GRat(-1, 2));
      }
  return CeComplex{cs, Derivation(cs, 1, std::move(comp), 1), f};
}

CeComplex::Cochain CeComplex::d_ce(const Cochain& cochain, int arity) const {
  int n = f.size();
  // plain antisymmetric lookup on a possibly unsorted tuple
  auto value = [&](std::vector<int> t) -> GRat {
    int sign = 1;
    for (size_t p = 1; p < t.size(); ++p)
      for (size_t i = 0; i + p < t.size(); ++i)
        if (t[i] > t[i + 1]) {
          std::swap(t[i], t[i + 1]);
          sign = -sign;
        }
    for (size_t i = 0; i + 1 < t.size(); ++i)
      if (t[i] == t[i + 1]) return GRat();
    auto it = cochain.find(t);
    if (it == cochain.end()) return GRat();
    return sign == 1 ? it->second : -it->second;
  };
  Cochain out;
  // iterate strictly increasing (arity+1)-tuples
  std::vector<int> t(arity + 1);
  for (int i = 0; i <= arity; ++i) t[i] = i;
  if (arity + 1 > n) return out;
  while (true) {
    GRat v;
    for (int a = 0; a <= arity; ++a)
      for (int b = a + 1; b <= arity; ++b) {
        std::vector<int> rest;
        for (int m = 0; m <= arity; ++m)
          if (m != a && m != b) rest.push_back(t[m]);
        for (int k = 0; k < n; ++k) {
          const GRat& c = f.c[t[a]][t[b]][k];
          if (c.is_zero()) continue;
          std::vector<int> args{k};
          args.insert(args.end(), rest.begin(), rest.end());
          GRat fv = value(std::move(args));
          if (fv.is_zero()) continue;
          // (-1)^{j+k} on 1-based positions j = a+1, k = b+1
          v += ((a + b) % 2 ? -(c * fv) : c * fv);
        }
      }
    if (!v.is_zero()) out[t] = v;
    int pos = arity;
    while (pos >= 0 && ++t[pos] == n - arity + pos) --pos;
    if (pos < 0) break;
    for (int i = pos + 1; i <= arity; ++i) t[i] = t[i - 1] + 1;
  }
  return out;
}

Poly CeComplex::cochain_poly(const Cochain& cochain, int arity) const {
  Poly p(coords);
  for (const auto& [t, v] : cochain) {
    if (int(t.size()) != arity) throw Error("cochain tuple of wrong arity");
    if (!std::is_sorted(t.begin(), t.end()))
      throw Error("cochain tuple not strictly increasing");
    p += tuple_monomial(coords, t) * Scalar(v);
  }
  return p;
}

LinftyAlgebra extract_linfty(const Derivation& q, int max_arity) {
  const auto& cs = q.coords();
  if (!cs) throw Error("extract_linfty: derivation has no coordinate ring");
  if (q.degree() && *q.degree() != 1)
    throw Error("extract_linfty needs a degree +1 derivation");
  int n = cs->size();
  for (int k = 0; k < n; ++k)
    if (!q.apply(q.component(k)).is_zero())
      throw Error("derivation does not square to zero");
  std::vector<std::string> names;
  std::vector<int> degrees;
  for (int i = 0; i < n; ++i) {
    names.push_back(cs->name(i));
    degrees.push_back(1 - cs->degree(i));
  }
  LinftyAlgebra g(std::move(names), degrees, max_arity);
  for (int k = 0; k < n; ++k)
    for (const auto& [m, c] : q.component(k).terms()) {
      int j = m.total_exponent();
      if (j == 0)
        throw Error("curved structures (constant Taylor term) are not supported");
      if (j > max_arity)
        throw Error("bracket arity " + std::to_string(j) +
                    " exceeds the configured maximum");
      std::vector<int> t;
      for (int i = 0; i < n; ++i)
        for (int r = 0; r < m.exp(i); ++r) t.push_back(i);
      if (!c.is_constant())
        throw Error("L-infinity extraction met an hbar-dependent coefficient");
      // Taylor coefficient of Q at this tuple, then the shift signs
      GRat d = c.constant_part() * tuple_extract(tuple_monomial(cs, t), t);
      int sg = sigma_sign(j) * decalage_sign(t, degrees);
      g.add_bracket(t, k, sg == 1 ? d : -d);
    }
  return g;
}

LinftyAlgebra forms_linfty(const SourceModel& model, const LinftyAlgebra& g) {
  int nk = model.size(), ng = g.size();
  std::vector<std::string> names;
  std::vector<int> degrees;
  for (int a = 0; a < nk; ++a)
    for (int i = 0; i < ng; ++i) {
      names.push_back(g.name(i) + "_" + model.basis_name(a));
      degrees.push_back(model.degree(a) + g.degree(i));
    }
  int top = g.top_arity();
  if (top > g.max_arity())
    throw Error("arity overflow in the forms extension");
  LinftyAlgebra out(names, degrees, g.max_arity());
  auto idx = [&](int a, int i) { return a * ng + i; };

  // lhat_1(e_a (x) X_i) = (De_a) (x) X_i + (-1)^{deg e_a} e_a (x) l_1(X_i)
  for (int a = 0; a < nk; ++a)
    for (int i = 0; i < ng; ++i) {
      for (int b = 0; b < nk; ++b) {
        GRat c = model.diff(a, b);
        if (!c.is_zero()) out.add_bracket({idx(a, i)}, idx(b, i), c);
      }
      auto l1 = g.apply({i});
      int sg = model.degree(a) % 2 ? -1 : 1;
      for (int k = 0; k < ng; ++k)
        if (!l1[k].is_zero())
          out.add_bracket({idx(a, i)}, idx(a, k),
                          sg == 1 ? l1[k] : -l1[k]);
    }

  // lhat_n, n >= 2: evaluate the sign-decorated formula on every tuple and
  // cross-check the values against the canonical-order entry, which verifies
  // graded antisymmetry of the construction as a side effect
  for (int arity = 2; arity <= top; ++arity) {
    if (g.max_arity() < arity) break;
    std::map<std::vector<int>, std::vector<GRat>> seen;
    std::vector<int> t(arity, 0);
    int total = nk * ng;
    while (true) {
      // split the tuple into (a_j, i_j)
      std::vector<int> as(arity), is(arity);
      for (int j = 0; j < arity; ++j) {
        as[j] = t[j] / ng;
        is[j] = t[j] % ng;
      }
      std::vector<GRat> lg = g.apply(is);
      bool lg_zero = true;
      for (const auto& v : lg)
        if (!v.is_zero()) {
          lg_zero = false;
          break;
        }
      std::vector<GRat> val(total);
      if (!lg_zero) {
        // sign exponent n sum_j deg(a_j)
        //   + sum_{j=0..n-2} deg(a_{n-j}) sum_{k=1..n-j-1} deg(X_{i_k})
        int e = 0;
        for (int j = 0; j < arity; ++j) e += arity * model.degree(as[j]);
        for (int j = 0; j <= arity - 2; ++j) {
          int da = model.degree(as[arity - 1 - j]);  // alpha_{n-j}, 1-based
          int dx = 0;
          for (int k = 0; k < arity - 1 - j; ++k) dx += g.degree(is[k]);
          e += da * dx;
        }
        int sg = ((e % 2) + 2) % 2 ? -1 : 1;
        // fold the model product e_{a_1} ... e_{a_n}
        std::vector<GRat> mp(nk);
        mp[as[0]] = GRat(1);
        for (int j = 1; j < arity; ++j) {
          std::vector<GRat> nx(nk);
          for (int c0 = 0; c0 < nk; ++c0) {
            if (mp[c0].is_zero()) continue;
            for (int c1 = 0; c1 < nk; ++c1) {
              GRat mc = model.mul(c0, as[j], c1);
              if (!mc.is_zero()) nx[c1] += mp[c0] * mc;
            }
          }
          mp = std::move(nx);
        }
        for (int c = 0; c < nk; ++c) {
          if (mp[c].is_zero()) continue;
          for (int k = 0; k < ng; ++k) {
            if (lg[k].is_zero()) continue;
            GRat v = mp[c] * lg[k];
            val[idx(c, k)] = sg == 1 ? v : -v;
          }
        }
      }
      // normalize against the canonical representative
      std::vector<int> key = t;
      int sign = out.normalize(key);
      if (sign == 0) {
        for (const auto& v : val)
          if (!v.is_zero())
            throw Error("forms bracket violates graded antisymmetry");
      } else {
        std::vector<GRat> canon = val;
        if (sign == -1)
          for (auto& v : canon) v = -v;
        auto it = seen.find(key);
        if (it == seen.end()) {
          seen.emplace(key, canon);
          for (int p = 0; p < total; ++p)
            if (!canon[p].is_zero()) out.add_bracket(key, p, canon[p]);
        } else if (it->second != canon) {
          throw Error("forms bracket violates graded antisymmetry");
        }
      }
      int pos = arity - 1;
      while (pos >= 0 && ++t[pos] == total) t[pos--] = 0;
      if (pos < 0) break;
    }
  }

  if (g.has_pairing()) {
    auto pp = model.poincare_pairing();
    std::vector<std::vector<GRat>> pr(nk * ng, std::vector<GRat>(nk * ng));
    for (int a1 = 0; a1 < nk; ++a1)
      for (int i1 = 0; i1 < ng; ++i1)
        for (int a2 = 0; a2 < nk; ++a2)
          for (int i2 = 0; i2 < ng; ++i2) {
            GRat v = pp[a1][a2] * g.pairing()[i1][i2];
            if (v.is_zero()) continue;
            int e = model.degree(a2) * g.degree(i1);
            pr[idx(a1, i1)][idx(a2, i2)] = (e % 2) ? -v : v;
          }
    out.set_pairing(std::move(pr));
  }
  return out;
}

LinftyAlgebra lie_linfty(const LieStructure& f) {
  int n = f.size();
  LinftyAlgebra g(f.names, std::vector<int>(n, 0));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = 0; k < n; ++k)
        if (!f.c[i][j][k].is_zero()) g.add_bracket({i, j}, k, f.c[i][j][k]);
  // invariant pairing tr(ad_a ad_b)
  std::vector<std::vector<GRat>> kappa(n, std::vector<GRat>(n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) kappa[a][b] += f.c[a][c][d] * f.c[b][d][c];
  g.set_pairing(std::move(kappa));
  return g;
}

Poly hmc_action_on(const LinftyAlgebra& g, const std::vector<Poly>& psi) {
  if (!g.has_pairing()) throw Error("homotopy Maurer-Cartan needs a pairing");
  if (int(psi.size()) != g.size())
    throw Error("component count does not match the basis");
  const auto& ring = psi.at(0).coords();
  Poly s(ring);
  int n = g.size();
  for (int j = 1; j <= g.top_arity(); ++j) {
    mpz_class fact = 1;  // (j+1)!
    for (int m = 2; m <= j + 1; ++m) fact *= m;
    GRat inv(mpq_class(1, fact));
    std::vector<int> t(j + 1, 0);
    while (true) {
      auto l = g.apply(std::vector<int>(t.begin() + 1, t.end()));
      GRat pval;
      for (int k = 0; k < n; ++k)
        if (!l[k].is_zero()) pval += g.pairing()[t[0]][k] * l[k];
      if (!pval.is_zero()) {
        // Koszul signs from moving each psi^{alpha_m} left past u_{alpha_0}
        // ... u_{alpha_{m-1}}
        int e = 0, gsum = g.degree(t[0]);
        for (int m = 1; m <= j; ++m) {
          int ppsi = (1 + g.degree(t[m])) & 1;
          e += ppsi * (gsum & 1);
          gsum += g.degree(t[m]);
        }
        Poly term = psi[t[0]];
        for (int m = 1; m <= j; ++m) term = term * psi[t[m]];
        GRat c = pval * inv;
        s += term * Scalar((e % 2) ? -c : c);
      }
      int pos = j;
      while (pos >= 0 && ++t[pos] == n) t[pos--] = 0;
      if (pos < 0) break;
    }
  }
  return s;
}

std::vector<Poly> hmc_mc_expression(const LinftyAlgebra& g,
                                    const std::vector<Poly>& psi) {
  if (int(psi.size()) != g.size())
    throw Error("component count does not match the basis");
  const auto& ring = psi.at(0).coords();
  int n = g.size();
  std::vector<Poly> mc(n, Poly(ring));
  for (int j = 1; j <= g.top_arity(); ++j) {
    mpz_class fact = 1;
    for (int m = 2; m <= j; ++m) fact *= m;
    GRat inv(mpq_class(1, fact));
    std::vector<int> t(j, 0);
    while (true) {
      auto l = g.apply(t);
      bool nz = false;
      for (const auto& v : l)
        if (!v.is_zero()) {
          nz = true;
          break;
        }
      if (nz) {
        int e = 0, gsum = g.degree(t[0]);
        for (int m = 1; m < j; ++m) {
          int ppsi = (1 + g.degree(t[m])) & 1;
          e += ppsi * (gsum & 1);
          gsum += g.degree(t[m]);
        }
        Poly term = psi[t[0]];
        for (int m = 1; m < j; ++m) term = term * psi[t[m]];
        for (int k = 0; k < n; ++k) {
          if (l[k].is_zero()) continue;
          GRat c = l[k] * inv;
          mc[k] += term * Scalar((e % 2) ? -c : c);
        }
      }
      int pos = j - 1;
      while (pos >= 0 && ++t[pos] == n) t[pos--] = 0;
      if (pos < 0) break;
    }
  }
  return mc;
}

HmcTheory hmc_action(const LinftyAlgebra& g) {
  if (!g.has_pairing()) throw Error("homotopy Maurer-Cartan needs a pairing");
  g.validate();
  int n = g.size();
  std::vector<GradedCoordinate> gc;
  for (int i = 0; i < n; ++i)
    gc.push_back({"psi_" + g.name(i), 1 - g.degree(i), Kind::base});
  auto ring = CoordinateSystem::make(std::move(gc));
  std::vector<Poly> psi;
  for (int i = 0; i < n; ++i) psi.push_back(Poly::coordinate(ring, i));
  // symplectic form on components: omega_{ab} = (-1)^{(1+g_b) g_a} <u_a, u_b>
  std::vector<std::vector<GRat>> form(n, std::vector<GRat>(n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      int e = (1 + g.degree(b)) * g.degree(a);
      form[a][b] =
          ((e % 2) + 2) % 2 ? -g.pairing()[a][b] : g.pairing()[a][b];
    }
  auto bmat = invert_matrix(form);  // throws on a degenerate pairing
  int nhat = 2 - g.pairing_degree_sum();
  if (((nhat % 2) + 2) % 2 == 0)
    throw Error("induced symplectic structure is not odd");
  auto sp = ConstantSymplectic::from_bracket_matrix(ring, nhat, bmat);
  Poly s = hmc_action_on(g, psi);
  auto cme = check_master_equation(sp, s, "hmc_cme");
  return HmcTheory{ring, std::move(psi), std::move(sp), std::move(s),
                   std::move(cme)};
}

}  // namespace gbv
