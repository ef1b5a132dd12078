#include "gbv/source_model.hpp"

#include <set>

#include "gbv/symplectic.hpp"

namespace gbv {

SourceModel::SourceModel(std::string name, int dim,
                         std::vector<BasisElement> basis,
                         std::vector<std::vector<std::vector<GRat>>> mul,
                         std::vector<std::vector<GRat>> diff,
                         std::vector<GRat> integral)
    : name_(std::move(name)),
      dim_(dim),
      basis_(std::move(basis)),
      mul_(std::move(mul)),
      diff_(std::move(diff)),
      integral_(std::move(integral)) {
  validate();
}

int SourceModel::find_basis(const std::string& name) const {
  for (int a = 0; a < size(); ++a)
    if (basis_[a].name == name) return a;
  return -1;
}

bool SourceModel::has_differential() const {
  for (const auto& row : diff_)
    for (const auto& v : row)
      if (!v.is_zero()) return true;
  return false;
}

void SourceModel::validate() const {
  const int n = size();
  if (n == 0) throw Error("source model: empty basis");
  if (dim_ < 1) throw Error("source model: dimension must be positive");
  std::set<std::string> seen;
  for (const auto& b : basis_) {
    if (!seen.insert(b.name).second)
      throw Error("source model: duplicate basis name " + b.name);
    if (b.degree < 0 || b.degree > dim_)
      throw Error("source model: basis degree out of range for " + b.name);
  }
  if (int(mul_.size()) != n || int(diff_.size()) != n ||
      int(integral_.size()) != n)
    throw Error("source model: table size mismatch");
  for (int a = 0; a < n; ++a) {
    if (int(mul_[a].size()) != n || int(diff_[a].size()) != n)
      throw Error("source model: table size mismatch");
    for (int b = 0; b < n; ++b)
      if (int(mul_[a][b].size()) != n)
        throw Error("source model: table size mismatch");
  }

  // basis element 0 is the unit
  if (degree(0) != 0) throw Error("source model: basis element 0 must have degree 0");
  for (int b = 0; b < n; ++b)
    for (int c = 0; c < n; ++c) {
      GRat want = (b == c) ? GRat(1) : GRat();
      if (!(mul_[0][b][c] == want) || !(mul_[b][0][c] == want))
        throw Error("source model: basis element 0 is not a unit");
    }

  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        if (mul_[a][b][c].is_zero()) continue;
        if (degree(c) != degree(a) + degree(b))
          throw Error("source model: product violates the grading");
        GRat mirror = mul_[b][a][c];
        if ((parity(a) * parity(b)) % 2) mirror = GRat() - mirror;
        if (!(mul_[a][b][c] == mirror))
          throw Error("source model: product is not graded commutative");
      }

  // associativity: (e_a e_b) e_c == e_a (e_b e_c)
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int f = 0; f < n; ++f) {
          GRat lhs, rhs;
          for (int e = 0; e < n; ++e) {
            lhs = lhs + mul_[a][b][e] * mul_[e][c][f];
            rhs = rhs + mul_[b][c][e] * mul_[a][e][f];
          }
          if (!(lhs == rhs))
            throw Error("source model: product is not associative");
        }

  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (!diff_[a][b].is_zero() && degree(b) != degree(a) + 1)
        throw Error("source model: differential does not have degree 1");
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < n; ++c) {
      GRat acc;
      for (int b = 0; b < n; ++b) acc = acc + diff_[a][b] * diff_[b][c];
      if (!acc.is_zero())
        throw Error("source model: differential does not square to zero");
    }
  // Leibniz: D(e_a e_b) = (De_a) e_b + (-1)^{|a|} e_a (De_b)
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int d = 0; d < n; ++d) {
        GRat lhs, rhs;
        for (int c = 0; c < n; ++c) lhs = lhs + mul_[a][b][c] * diff_[c][d];
        for (int e = 0; e < n; ++e) rhs = rhs + diff_[a][e] * mul_[e][b][d];
        for (int e = 0; e < n; ++e) {
          GRat t = diff_[b][e] * mul_[a][e][d];
          if (parity(a)) t = GRat() - t;
          rhs = rhs + t;
        }
        if (!(lhs == rhs))
          throw Error("source model: differential violates the Leibniz rule");
      }

  bool top_hit = false;
  for (int a = 0; a < n; ++a) {
    if (integral_[a].is_zero()) continue;
    if (degree(a) != dim_)
      throw Error("source model: integral is nonzero below top degree");
    top_hit = true;
  }
  if (!top_hit) throw Error("source model: integral vanishes identically");
  // Stokes: integral of D e_a vanishes
  for (int a = 0; a < n; ++a) {
    GRat acc;
    for (int b = 0; b < n; ++b) acc = acc + diff_[a][b] * integral_[b];
    if (!acc.is_zero())
      throw Error("source model: integral is not closed under the differential");
  }
}

std::vector<std::vector<GRat>> SourceModel::poincare_pairing() const {
  const int n = size();
  std::vector<std::vector<GRat>> p(n, std::vector<GRat>(n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      GRat acc;
      for (int c = 0; c < n; ++c) acc = acc + mul_[a][b][c] * integral_[c];
      p[a][b] = acc;
    }
  invert_matrix(p);  // throws on a degenerate pairing
  return p;
}

namespace {

std::vector<std::vector<std::vector<GRat>>> zero_mul(int n) {
  return std::vector<std::vector<std::vector<GRat>>>(
      n, std::vector<std::vector<GRat>>(n, std::vector<GRat>(n)));
}

}  // namespace

SourceModel SourceModel::circle() {
  auto mul = zero_mul(2);
  mul[0][0][0] = GRat(1);
  mul[0][1][1] = GRat(1);
  mul[1][0][1] = GRat(1);
  return SourceModel("circle", 1, {{"1", 0}, {"th", 1}}, mul,
                     {{GRat(), GRat()}, {GRat(), GRat()}}, {GRat(), GRat(1)});
}

SourceModel SourceModel::torus(int d) {
  if (d < 1 || d > 6) throw Error("torus model: dimension out of range");
  const int n = 1 << d;
  std::vector<BasisElement> basis(n);
  for (int m = 0; m < n; ++m) {
    std::string nm;
    int deg = 0;
    for (int i = 0; i < d; ++i)
      if (m & (1 << i)) {
        nm += std::to_string(i + 1);
        ++deg;
      }
    basis[m] = {m == 0 ? "1" : "t" + nm, deg};
  }
  auto mul = zero_mul(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      if (a & b) continue;  // repeated generator
      // sign from interleaving the two ascending generator lists
      int swaps = 0;
      for (int i = 0; i < d; ++i)
        if (b & (1 << i))
          for (int j = i + 1; j < d; ++j)
            if (a & (1 << j)) ++swaps;
      mul[a][b][a | b] = (swaps % 2) ? GRat(-1) : GRat(1);
    }
  std::vector<std::vector<GRat>> diff(n, std::vector<GRat>(n));
  std::vector<GRat> integral(n);
  integral[n - 1] = GRat(1);
  return SourceModel("torus" + std::to_string(d), d, basis, mul, diff,
                     integral);
}

SourceModel SourceModel::sphere2() {
  auto mul = zero_mul(2);
  mul[0][0][0] = GRat(1);
  mul[0][1][1] = GRat(1);
  mul[1][0][1] = GRat(1);
  return SourceModel("sphere2", 2, {{"1", 0}, {"v", 2}}, mul,
                     {{GRat(), GRat()}, {GRat(), GRat()}}, {GRat(), GRat(1)});
}

SourceModel SourceModel::dg_model3() {
  // basis 1, eps (deg 1), tau = D eps (deg 2), eps tau (deg 3)
  auto mul = zero_mul(4);
  for (int b = 0; b < 4; ++b) {
    mul[0][b][b] = GRat(1);
    mul[b][0][b] = GRat(1);
  }
  mul[1][2][3] = GRat(1);
  mul[2][1][3] = GRat(1);
  std::vector<std::vector<GRat>> diff(4, std::vector<GRat>(4));
  diff[1][2] = GRat(1);
  return SourceModel("dg3", 3,
                     {{"1", 0}, {"eps", 1}, {"tau", 2}, {"epstau", 3}}, mul,
                     diff, {GRat(), GRat(), GRat(), GRat(1)});
}

ModelPoly::ModelPoly(const SourceModel* model, CoordsPtr fields, int trunc)
    : model_(model), fields_(std::move(fields)), trunc_(trunc) {
  comp_.assign(model_->size(), Poly::constant(fields_, Scalar(), trunc_));
}

ModelPoly ModelPoly::pure(const SourceModel* model, int a, Poly f) {
  ModelPoly r(model, f.coords(), f.truncation());
  r.comp_.at(a) = std::move(f);
  return r;
}

bool ModelPoly::is_zero() const {
  for (const auto& c : comp_)
    if (!c.is_zero()) return false;
  return true;
}

ModelPoly ModelPoly::operator+(const ModelPoly& o) const {
  ModelPoly r = *this;
  r += o;
  return r;
}

ModelPoly& ModelPoly::operator+=(const ModelPoly& o) {
  if (!model_ || !o.model_ || model_ != o.model_)
    throw Error("model poly: mixed source models");
  for (int a = 0; a < int(comp_.size()); ++a) comp_[a] = comp_[a] + o.comp_[a];
  return *this;
}

ModelPoly ModelPoly::operator-() const {
  ModelPoly r = *this;
  for (auto& c : r.comp_) c = -c;
  return r;
}

ModelPoly ModelPoly::operator*(const ModelPoly& o) const {
  if (!model_ || model_ != o.model_)
    throw Error("model poly: mixed source models");
  ModelPoly r(model_, fields_, std::min(trunc_, o.trunc_));
  const int n = model_->size();
  for (int a = 0; a < n; ++a) {
    if (comp_[a].is_zero()) continue;
    const bool pa = model_->parity(a);
    for (int b = 0; b < n; ++b) {
      if (o.comp_[b].is_zero()) continue;
      // move e_a across the even and odd parts of the second factor
      Poly g = o.comp_[b];
      if (pa) {
        Poly even = g.filter([&](const Monomial& m) {
          return g.monomial_parity(m) == 0;
        });
        Poly odd = g + (-even);
        g = even + (-odd);
      }
      Poly fg = comp_[a] * g;
      if (fg.is_zero()) continue;
      for (int c = 0; c < n; ++c) {
        GRat k = model_->mul(a, b, c);
        if (k.is_zero()) continue;
        r.comp_[c] = r.comp_[c] + fg * Scalar(k);
      }
    }
  }
  return r;
}

ModelPoly ModelPoly::operator*(const Scalar& s) const {
  ModelPoly r = *this;
  for (auto& c : r.comp_) c = c * s;
  return r;
}

ModelPoly ModelPoly::differential() const {
  ModelPoly r(model_, fields_, trunc_);
  const int n = model_->size();
  for (int a = 0; a < n; ++a) {
    if (comp_[a].is_zero()) continue;
    Poly even = comp_[a].filter(
        [&](const Monomial& m) { return comp_[a].monomial_parity(m) == 0; });
    Poly signed_f = even + (-(comp_[a] + (-even)));  // (-1)^{p_f} f
    for (int b = 0; b < n; ++b) {
      GRat k = model_->diff(a, b);
      if (k.is_zero()) continue;
      r.comp_[b] = r.comp_[b] + signed_f * Scalar(k);
    }
  }
  return r;
}

Poly ModelPoly::integrate() const {
  Poly r = Poly::constant(fields_, Scalar(), trunc_);
  for (int a = 0; a < int(comp_.size()); ++a) {
    GRat k = model_->integral(a);
    if (!k.is_zero()) r = r + comp_[a] * Scalar(k);
  }
  return r;
}

}  // namespace gbv
