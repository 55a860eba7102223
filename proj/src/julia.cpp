#include "ramify/julia.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "ramify/rng.hpp"

namespace ramify {

int Poly::degree() const {
  for (int i = int(c.size()) - 1; i >= 0; --i)
    if (c[size_t(i)] != Cplx(0, 0)) return i;
  return -1;
}

Cplx Poly::eval(Cplx z) const {
  Cplx acc(0, 0);
  for (int i = int(c.size()) - 1; i >= 0; --i) acc = acc * z + c[size_t(i)];
  return acc;
}

Poly Poly::derivative() const {
  Poly d;
  for (size_t i = 1; i < c.size(); ++i) d.c.push_back(double(i) * c[i]);
  return d;
}

Poly Poly::mul(const Poly& a, const Poly& b) {
  Poly out;
  if (a.c.empty() || b.c.empty()) return out;
  out.c.assign(a.c.size() + b.c.size() - 1, Cplx(0, 0));
  for (size_t i = 0; i < a.c.size(); ++i)
    for (size_t j = 0; j < b.c.size(); ++j) out.c[i + j] += a.c[i] * b.c[j];
  return out;
}

Poly Poly::add(const Poly& a, const Poly& b) {
  Poly out;
  out.c.assign(std::max(a.c.size(), b.c.size()), Cplx(0, 0));
  for (size_t i = 0; i < a.c.size(); ++i) out.c[i] += a.c[i];
  for (size_t i = 0; i < b.c.size(); ++i) out.c[i] += b.c[i];
  return out;
}

Poly Poly::scale(const Poly& a, Cplx s) {
  Poly out = a;
  for (auto& x : out.c) x *= s;
  return out;
}

void Poly::trim(double tol) {
  while (!c.empty() && std::abs(c.back()) <= tol) c.pop_back();
}

std::vector<Cplx> poly_roots(const Poly& p) {
  Poly q = p;
  q.trim(0.0);
  int n = q.degree();
  if (n <= 0) return {};
  if (n == 1) return {-q.c[0] / q.c[1]};
  if (n == 2) {
    Cplx a = q.c[2], b = q.c[1], c0 = q.c[0];
    Cplx disc = std::sqrt(b * b - 4.0 * a * c0);
    // pick the better-conditioned branch
    Cplx qq = (std::real(std::conj(b) * disc) >= 0) ? -0.5 * (b + disc) : -0.5 * (b - disc);
    std::vector<Cplx> roots;
    if (qq == Cplx(0, 0)) {
      roots = {Cplx(0, 0), Cplx(0, 0)};
    } else {
      roots = {qq / a, c0 / qq};
    }
    return roots;
  }
  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) comp(i, n - 1) = -q.c[size_t(i)] / q.c[size_t(n)];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
  std::vector<Cplx> roots;
  Poly dq = q.derivative();
  for (int i = 0; i < n; ++i) {
    Cplx z = es.eigenvalues()(i);
    for (int it = 0; it < 50; ++it) {  // Newton polish to residual < 1e-12
      Cplx fz = q.eval(z);
      if (std::abs(fz) < 1e-12) break;
      Cplx dz = dq.eval(z);
      if (std::abs(dz) < 1e-300) break;
      z -= fz / dz;
    }
    roots.push_back(z);
  }
  std::sort(roots.begin(), roots.end(), [](Cplx a, Cplx b) {
    return std::real(a) < std::real(b) || (std::real(a) == std::real(b) && std::imag(a) < std::imag(b));
  });
  return roots;
}

int RationalMap::degree() const { return std::max(P.degree(), Q.degree()); }

Cplx RationalMap::eval(Cplx z) const { return P.eval(z) / Q.eval(z); }

Cplx RationalMap::deriv(Cplx z) const {
  Cplx q = Q.eval(z);
  return (P.derivative().eval(z) * q - P.eval(z) * Q.derivative().eval(z)) / (q * q);
}

RationalMap RationalMap::polynomial(std::vector<Cplx> coeffs) {
  RationalMap f;
  f.P.c = std::move(coeffs);
  f.Q.c = {Cplx(1, 0)};
  return f;
}

RationalMap RationalMap::compose(const RationalMap& inner) const {
  // this = P/Q evaluated at inner = p/q: sum_i P_i p^i q^(d-i) / ...
  int d = std::max(P.degree(), Q.degree());
  std::vector<Poly> ppow(size_t(d) + 1), qpow(size_t(d) + 1);
  ppow[0].c = {Cplx(1, 0)};
  qpow[0].c = {Cplx(1, 0)};
  for (int i = 1; i <= d; ++i) {
    ppow[size_t(i)] = Poly::mul(ppow[size_t(i) - 1], inner.P);
    qpow[size_t(i)] = Poly::mul(qpow[size_t(i) - 1], inner.Q);
  }
  Poly num, den;
  for (int i = 0; i <= d; ++i) {
    Poly term = Poly::mul(ppow[size_t(i)], qpow[size_t(d - i)]);
    if (i < int(P.c.size())) num = Poly::add(num, Poly::scale(term, P.c[size_t(i)]));
    if (i < int(Q.c.size())) den = Poly::add(den, Poly::scale(term, Q.c[size_t(i)]));
  }
  RationalMap out;
  out.P = std::move(num);
  out.Q = std::move(den);
  out.P.trim(0.0);
  out.Q.trim(0.0);
  return out;
}

bool RationalMap::coprime(double tol) const {
  if (P.degree() <= 0 || Q.degree() <= 0) return true;
  auto rp = poly_roots(P);
  auto rq = poly_roots(Q);
  for (Cplx a : rp)
    for (Cplx b : rq)
      if (std::abs(a - b) < tol) return false;
  return true;
}

PreimageResult preimages(const RationalMap& f, Cplx w) {
  // roots of P(z) - w Q(z)
  Poly g = Poly::add(f.P, Poly::scale(f.Q, -w));
  int full_degree = f.degree();
  g.trim(1e-13 * (1.0 + std::abs(w)));
  PreimageResult out;
  out.at_infinity = full_degree - g.degree();
  if (g.degree() < full_degree && out.at_infinity > 0) {
    // leading coefficients cancelled: report the drop explicitly
  }
  if (g.degree() >= 1) out.roots = poly_roots(g);
  // polish against the rational form and report residual failures
  for (Cplx& z : out.roots) {
    for (int it = 0; it < 60; ++it) {
      Cplx r = f.P.eval(z) - w * f.Q.eval(z);
      if (std::abs(r) < 1e-12) break;
      Cplx dr = f.P.derivative().eval(z) - w * f.Q.derivative().eval(z);
      if (std::abs(dr) < 1e-300) break;
      z -= r / dr;
    }
  }
  std::sort(out.roots.begin(), out.roots.end(), [](Cplx a, Cplx b) {
    return std::real(a) < std::real(b) || (std::real(a) == std::real(b) && std::imag(a) < std::imag(b));
  });
  return out;
}

std::vector<FixedPointInfo> find_fixed_points(const RationalMap& f) {
  // roots of P(z) - z Q(z)
  Poly zq = Poly::mul(Poly{{Cplx(0, 0), Cplx(1, 0)}}, f.Q);
  Poly g = Poly::add(f.P, Poly::scale(zq, Cplx(-1, 0)));
  g.trim(1e-14);
  std::vector<FixedPointInfo> out;
  for (Cplx z : poly_roots(g)) {
    // polish on the fixed-point equation
    for (int it = 0; it < 60; ++it) {
      Cplx r = f.P.eval(z) - z * f.Q.eval(z);
      if (std::abs(r) < 1e-13) break;
      Cplx dr = f.P.derivative().eval(z) - f.Q.eval(z) - z * f.Q.derivative().eval(z);
      if (std::abs(dr) < 1e-300) break;
      z -= r / dr;
    }
    FixedPointInfo info;
    info.z = z;
    info.multiplier = f.deriv(z);
    double m = std::abs(info.multiplier);
    info.kind = m > 1 + 1e-9   ? FixedPointInfo::Kind::Repelling
                : m < 1e-9     ? FixedPointInfo::Kind::Superattracting
                : m < 1 - 1e-9 ? FixedPointInfo::Kind::Attracting
                               : FixedPointInfo::Kind::Indifferent;
    out.push_back(info);
  }
  std::sort(out.begin(), out.end(), [](const FixedPointInfo& a, const FixedPointInfo& b) {
    return std::real(a.z) < std::real(b.z) ||
           (std::real(a.z) == std::real(b.z) && std::imag(a.z) < std::imag(b.z));
  });
  return out;
}

JuliaSample sample_julia(const RationalMap& f, int64_t n, uint64_t seed) {
  auto fixed = find_fixed_points(f);
  const FixedPointInfo* seed_pt = nullptr;
  for (const auto& fp : fixed)
    if (fp.kind == FixedPointInfo::Kind::Repelling) {
      seed_pt = &fp;
      break;
    }
  if (!seed_pt) raise(ErrorCode::NoRepellingSeed, "map has no repelling fixed point");

  JuliaSample out;
  out.count = n;
  out.seed = seed;
  out.pts.reserve(size_t(n));
  CounterRng rng(seed, /*stream=*/1);
  Cplx z = seed_pt->z;
  int64_t kept = 0;
  for (int64_t step = 0; kept < n; ++step) {
    PreimageResult pre = preimages(f, z);
    if (pre.roots.empty()) {  // retreat to the seed on a degenerate branch
      z = seed_pt->z;
      continue;
    }
    z = pre.roots[size_t(rng.next_below(uint64_t(pre.roots.size())))];
    if (step >= out.burn_in) {
      out.pts.push_back(z);
      ++kept;
    }
  }
  return out;
}

// ---- JSON -------------------------------------------------------------------

namespace {
std::vector<Cplx> coeffs_from_json(const nlohmann::json& arr) {
  std::vector<Cplx> out;
  for (const auto& e : arr) out.push_back({e.at(0).get<double>(), e.at(1).get<double>()});
  return out;
}
}  // namespace

RationalMap RationalMap::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  RationalMap f;
  f.P.c = coeffs_from_json(j.at("num"));
  if (j.contains("den"))
    f.Q.c = coeffs_from_json(j.at("den"));
  else
    f.Q.c = {Cplx(1, 0)};
  if (f.degree() < 2) raise(ErrorCode::BadInput, "rational map must have degree >= 2");
  if (!f.coprime()) raise(ErrorCode::BadInput, "numerator and denominator share a root");
  return f;
}

std::string RationalMap::to_json() const {
  nlohmann::json j;
  auto dump = [](const Poly& p) {
    nlohmann::json arr = nlohmann::json::array();
    for (Cplx c : p.c) arr.push_back({std::real(c), std::imag(c)});
    return arr;
  };
  j["num"] = dump(P);
  j["den"] = dump(Q);
  return j.dump();
}

BranchCutSpec BranchCutSpec::from_json(const std::string& text, const RationalMap& f) {
  nlohmann::json j = nlohmann::json::parse(text);
  BranchCutSpec cut;
  if (j.contains("points")) {
    for (const auto& p : j.at("points")) cut.points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    return cut;
  }
  if (j.contains("poly")) {
    Poly p;
    p.c = coeffs_from_json(j.at("poly"));
    std::string select = j.value("select", "all");
    for (Cplx z : poly_roots(p)) {
      if (select == "nonreal" && std::abs(std::imag(z)) < 1e-9) continue;
      if (select == "real" && std::abs(std::imag(z)) >= 1e-9) continue;
      cut.points.push_back(z);
    }
    return cut;
  }
  (void)f;
  raise(ErrorCode::BadInput, "branch cut JSON needs 'points' or 'poly'");
}

// ---- builtins ----------------------------------------------------------------

RationalMap basilica_map() { return RationalMap::polynomial({Cplx(-1, 0), Cplx(0, 0), Cplx(1, 0)}); }

RationalMap bubblebath_map() {
  // 1 - z^-2 = (z^2 - 1) / z^2
  RationalMap f;
  f.P.c = {Cplx(-1, 0), Cplx(0, 0), Cplx(1, 0)};
  f.Q.c = {Cplx(0, 0), Cplx(0, 0), Cplx(1, 0)};
  return f;
}

BranchCutSpec basilica_cut(const RationalMap& f) {
  BranchCutSpec cut;
  for (const auto& fp : find_fixed_points(f))
    if (std::real(fp.z) < 0) cut.points.push_back(fp.z);  // (1 - sqrt 5)/2
  if (cut.points.size() != 1) raise(ErrorCode::BadInput, "unexpected basilica fixed points");
  return cut;
}

BranchCutSpec bubblebath_cut(const RationalMap& f) {
  BranchCutSpec cut;
  for (const auto& fp : find_fixed_points(f))
    if (std::abs(std::imag(fp.z)) > 1e-9) cut.points.push_back(fp.z);  // q and conj(q)
  if (cut.points.size() != 2) raise(ErrorCode::BadInput, "unexpected bubble bath fixed points");
  return cut;
}

}  // namespace ramify
