#include "checks.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <mutex>
#include <regex>
#include <set>
#include <sstream>

#include "deltaflow/euler.hpp"
#include "deltaflow/jets.hpp"
#include "deltaflow/lax.hpp"
#include "deltaflow/parse.hpp"

namespace deltaflow::cli {

namespace {

using ZElem = ChartElement<mpz_class>;
using QElem = ChartElement<mpq_class>;

const std::vector<std::string> kChecks{
    "padic.laws",        "classical.euler",  "classical.symplectic", "classical.poisson", "classical.lax",
    "jets.prolong",      "euler.hasse",      "euler.build",          "euler.linearization", "euler.new1",
    "euler.new2",        "euler.ap",         "lax.star",             "lax.star_star",     "lax.spectrum"};

// Collects the first few failures of a check as a witness string.
class Witness {
 public:
  void add(const std::string& where, const std::string& residual) {
    ++count_;
    if (count_ <= 3) {
      if (!text_.empty()) text_ += "; ";
      text_ += where + ": " + (residual.size() > 600 ? residual.substr(0, 600) + "..." : residual);
    }
  }
  void finish(CheckResult& r) const {
    if (count_ == 0) return;
    r.status = Status::fail;
    r.residual = text_ + (count_ > 3 ? "; ... (" + std::to_string(count_) + " failures)" : "");
  }
  std::size_t count() const { return count_; }

 private:
  std::size_t count_ = 0;
  std::string text_;
};

template <class C, class F>
MultiPoly<C> random_poly(const Chart<C>& chart, const std::vector<std::size_t>& idx, unsigned deg, unsigned terms,
                         std::mt19937_64& rng, F&& coeff) {
  std::vector<typename MultiPoly<C>::Term> out;
  for (unsigned t = 0; t < terms; ++t) {
    Monomial m;
    unsigned left = static_cast<unsigned>(rng() % (deg + 1));
    for (; left > 0; --left) m[idx[rng() % idx.size()]] += 1;
    out.emplace_back(m, coeff(rng));
  }
  return MultiPoly<C>::from_terms(chart.vars(), chart.ring(), std::move(out));
}

mpq_class small_rational(std::mt19937_64& rng) {
  mpq_class q(static_cast<long>(rng() % 11) - 5, static_cast<unsigned long>(rng() % 4 + 1));
  q.canonicalize();
  return q;
}

template <class C>
Chart<C> sphere_chart(CoeffRing<C> ring) {
  Variables v{"x1", "x2", "x3"};
  std::vector<typename Chart<C>::Factor> f;
  for (int i = 0; i < 3; ++i) f.push_back({v.name(i), MultiPoly<C>::variable(v, ring, i)});
  return Chart<C>(v, ring, f);
}

std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

// ---------------------------------------------------------------- p-adic laws

void padic_laws(const RunConfig& cfg, unsigned p, CheckResult& r, std::mt19937_64& rng) {
  const unsigned N = cfg.precision;
  mpz_class big;
  mpz_ui_pow_ui(big.get_mpz_t(), p, N + 1);
  gmp_randclass gr(gmp_randinit_default);
  gr.seed(static_cast<unsigned long>(rng()));
  Witness w;
  const TruncatedPadic pN(p, N, static_cast<long>(p));
  for (unsigned s = 0; s < cfg.samples; ++s) {
    const mpz_class a = gr.get_z_range(big), b = gr.get_z_range(big);
    const TruncatedPadic A(p, N + 1, a), B(p, N + 1, b);
    // (a^p + b^p - (a+b)^p)/p over Z.
    mpz_class ap, bp, sp;
    mpz_pow_ui(ap.get_mpz_t(), a.get_mpz_t(), p);
    mpz_pow_ui(bp.get_mpz_t(), b.get_mpz_t(), p);
    const mpz_class sum = a + b;
    mpz_pow_ui(sp.get_mpz_t(), sum.get_mpz_t(), p);
    const TruncatedPadic cross(p, N, mpz_class((ap + bp - sp) / p));
    const TruncatedPadic dA = delta_base(A), dB = delta_base(B);
    if (!(delta_base(A + B) == dA + dB + cross)) w.add("sum a=" + a.get_str() + " b=" + b.get_str(), "delta(a+b) mismatch");
    if (!(delta_base(A * B) == A.pow(p) * dB + B.pow(p) * dA + pN * dA * dB)) {
      w.add("product a=" + a.get_str() + " b=" + b.get_str(), "delta(ab) mismatch");
    }
    const unsigned res = static_cast<unsigned>(rng() % p);
    const TruncatedPadic t = teichmuller(p, res, N);
    if (!(t.pow(p) == t) || t.residue() != res) w.add("teichmuller " + std::to_string(res), t.to_string());
  }
  r.output = {{"samples", cfg.samples}};
  w.finish(r);
}

// ---------------------------------------------------------------- classical

void classical_euler(CheckResult& r) {
  const Chart<mpz_class> chart{Variables{"x1", "x2", "x3", "a1", "a2", "a3"}, {}, {}, {"a1", "a2", "a3"}};
  auto x = [&](int i) { return chart.poly_var(i); };
  auto a = [&](int i) { return chart.poly_var(3 + i); };
  std::vector<ZElem> images;
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    images.emplace_back(chart, (a(j) - a(k)) * x(j) * x(k));
  }
  for (int i = 0; i < 3; ++i) images.emplace_back(chart, chart.poly_zero());
  const ClassicalFlow<mpz_class> flow(chart, images);
  const ZPoly H1 = a(0) * x(0) * x(0) + a(1) * x(1) * x(1) + a(2) * x(2) * x(2);
  const ZPoly H2 = x(0) * x(0) + x(1) * x(1) + x(2) * x(2);
  const ZElem d1 = check_prime_integral(flow, H1), d2 = check_prime_integral(flow, H2);
  r.output = {{"deltaH1", d1.to_string()}, {"deltaH2", d2.to_string()}};
  Witness w;
  if (!d1.is_zero()) w.add("deltaH1", d1.to_string());
  if (!d2.is_zero()) w.add("deltaH2", d2.to_string());
  w.finish(r);
}

// On the sphere -dH1 ^ omega_i restricts to kSphereValue * eta; the Euler
// flow preserves eta.
constexpr long kSphereValue = 2;

void classical_symplectic(const RunConfig& cfg, unsigned p, CheckResult& r, std::mt19937_64& rng) {
  Witness w;
  const PadicRing F(p, 1);
  const auto chart = sphere_chart<TruncatedPadic>(F);
  const PElement target = PElement::constant(chart, kSphereValue);
  for (unsigned s = 0; s < cfg.samples; ++s) {
    const auto t = sample_triple(p, rng);
    const FiberFrame<TruncatedPadic> frame(chart, {F.from_int(t[0]), F.from_int(t[1]), F.from_int(t[2])});
    const TruncatedPadic c2 = F.from_int(static_cast<long>(rng() % (p - 1) + 1));
    const auto dH1 = DiffForm<TruncatedPadic>::d(frame.H1(), chart);
    const std::string where = "a=(" + std::to_string(t[0]) + "," + std::to_string(t[1]) + "," + std::to_string(t[2]) +
                              ") c2=" + c2.to_string();
    for (int i = 0; i < 3; ++i) {
      const PElement h = restrict_to_sphere(-dH1.wedge(frame.omega(i)), frame, c2);
      const auto res = sphere_residual(h, target, c2);
      if (!res.is_zero()) w.add(where + " omega" + std::to_string(i + 1), h.to_string());
    }
    const ClassicalFlow<TruncatedPadic> flow(chart, frame.v_field());
    const PElement L = restrict_to_sphere(lie_derivative(flow, frame.eta(0)), frame, c2);
    if (!L.is_zero()) w.add(where + " lie(eta)", L.to_string());
  }
  // One exact rational instance.
  const auto qchart = sphere_chart<mpq_class>({});
  const FiberFrame<mpq_class> qframe(qchart, {mpq_class(2), mpq_class(-1), mpq_class(1, 3)});
  const mpq_class qc2 = 3;
  const auto qdH1 = DiffForm<mpq_class>::d(qframe.H1(), qchart);
  nlohmann::json values = nlohmann::json::array();
  for (int i = 0; i < 3; ++i) {
    const QElem h = restrict_to_sphere(-qdH1.wedge(qframe.omega(i)), qframe, qc2);
    values.push_back(h.to_string());
    if (!sphere_residual(h, QElem::constant(qchart, kSphereValue), qc2).is_zero()) {
      w.add("rational omega" + std::to_string(i + 1), h.to_string());
    }
  }
  const ClassicalFlow<mpq_class> qflow(qchart, qframe.v_field());
  if (!restrict_to_sphere(lie_derivative(qflow, qframe.eta(0)), qframe, qc2).is_zero()) w.add("rational lie(eta)", "nonzero");
  r.output = {{"samples", cfg.samples}, {"rational_restrictions", values}};
  w.finish(r);
}

void classical_poisson(const RunConfig& cfg, unsigned p, CheckResult& r, std::mt19937_64& rng) {
  Witness w;
  const auto qchart = sphere_chart<mpq_class>({});
  const auto so3 = lie_poisson(qchart, {0, 1, 2}, so3_constants());
  const QElem H2 = QElem::constant(qchart, 0) + QElem::variable(qchart, 0) * QElem::variable(qchart, 0) +
                   QElem::variable(qchart, 1) * QElem::variable(qchart, 1) +
                   QElem::variable(qchart, 2) * QElem::variable(qchart, 2);
  for (int i = 0; i < 3; ++i) {
    const QElem c = so3.bracket(H2, QElem::variable(qchart, i));
    if (!c.is_zero()) w.add("casimir x" + std::to_string(i + 1), c.to_string());
  }
  for (unsigned s = 0; s < cfg.samples; ++s) {
    const QElem f(qchart, random_poly(qchart, {0, 1, 2}, 3, 3, rng, small_rational));
    const QElem g(qchart, random_poly(qchart, {0, 1, 2}, 3, 3, rng, small_rational));
    const QElem h(qchart, random_poly(qchart, {0, 1, 2}, 3, 3, rng, small_rational));
    const QElem j = so3.jacobi_defect(f, g, h);
    if (!j.is_zero()) w.add("so3 jacobi", j.to_string());
  }
  for (unsigned n : cfg.sizes) {
    if (n > 3) continue;
    const Chart<mpz_class> chart(Variables(gl_names(n)), {});
    std::vector<std::size_t> coords(n * n);
    for (std::size_t i = 0; i < n * n; ++i) coords[i] = i;
    const auto ps = lie_poisson(chart, coords, gln_constants(n));
    for (std::size_t a = 0; a < n * n; ++a)
      for (std::size_t b = 0; b < n * n; ++b)
        for (std::size_t c = 0; c < n * n; ++c) {
          const ZElem j = ps.jacobi_defect(ZElem::variable(chart, a), ZElem::variable(chart, b), ZElem::variable(chart, c));
          if (!j.is_zero()) w.add("gl" + std::to_string(n) + " jacobi", j.to_string());
        }
  }
  // Bracket from eta against Lie-Poisson on generators, over F_p.
  const PadicRing F(p, 1);
  const auto chart = sphere_chart<TruncatedPadic>(F);
  const auto t = sample_triple(p, rng);
  const FiberFrame<TruncatedPadic> frame(chart, {F.from_int(t[0]), F.from_int(t[1]), F.from_int(t[2])});
  const auto lp = lie_poisson(chart, {0, 1, 2}, so3_constants());
  for (long c = 1; c < static_cast<long>(p); ++c) {
    const TruncatedPadic c2 = F.from_int(c);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const PElement xi = PElement::variable(chart, i), xj = PElement::variable(chart, j);
        const PElement lhs = poisson_from_symplectic(frame, xi, xj, c2);
        const PElement rhs(chart, normal_form_sphere(lp.bracket(xi, xj).numerator(), c2));
        if (!sphere_residual(lhs, rhs, c2).is_zero()) {
          w.add("eta bracket c2=" + std::to_string(c) + " (" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")",
                lhs.to_string());
        }
      }
  }
  r.output = {{"samples", cfg.samples}};
  w.finish(r);
}

void classical_lax(unsigned n, CheckResult& r, std::mt19937_64& rng) {
  const auto names = gl_names(n);
  std::vector<std::string> params;
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= n; ++j) params.push_back("m" + std::to_string(i) + std::to_string(j));
  std::vector<std::string> all = names;
  all.insert(all.end(), params.begin(), params.end());
  const Chart<mpz_class> chart(Variables(all), {}, {}, params);
  // Symbolic M: a free parameter plus a random linear form in x per entry.
  Matrix<ZElem> M;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<ZElem> row;
    for (std::size_t j = 0; j < n; ++j) {
      ZPoly entry = chart.poly_var(params[i * n + j]);
      for (std::size_t k = 0; k < n * n; ++k) entry = entry + chart.poly_var(k).scale(static_cast<long>(rng() % 7) - 3);
      row.emplace_back(chart, entry);
    }
    M.push_back(std::move(row));
  }
  Witness w;
  for (std::size_t j = 1; j <= n; ++j) {
    const ZElem d = isospectrality_defect(chart, M, j);
    if (!d.is_zero()) w.add("delta P" + std::to_string(j), d.to_string());
  }
  w.finish(r);
}

// ---------------------------------------------------------------- jets

struct ParsedPoly {
  Variables vars;
  ZPoly f;
};

ParsedPoly parse_user_poly(const std::string& text) {
  static const std::regex ident("[A-Za-z_][A-Za-z0-9_]*");
  std::vector<std::string> names;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), ident); it != std::sregex_iterator(); ++it) {
    if (std::find(names.begin(), names.end(), it->str()) == names.end()) names.push_back(it->str());
  }
  Variables vars(names);
  return {vars, parse_polynomial(text, vars)};
}

void jets_prolong(const RunConfig& cfg, unsigned p, CheckResult& r, std::mt19937_64& rng) {
  const ParsedPoly in = parse_user_poly(cfg.poly);
  const JetFlavor flavor = cfg.flavor == "classical" ? JetFlavor::classical : JetFlavor::arithmetic;
  const JetPresentation jet = prolong(in.f, cfg.order, flavor, flavor == JetFlavor::arithmetic ? p : 0);
  Witness w;
  nlohmann::json rels = nlohmann::json::array();
  for (const auto& rel : jet.relations) rels.push_back(rel.to_string());
  for (unsigned k = 1; k <= cfg.order; ++k) {
    if (!(universal_delta(jet.relations[k - 1], jet) == jet.relations[k])) w.add("level " + std::to_string(k), "delta of relation differs");
  }
  const std::size_t nb = jet.base.size();
  // Relations evaluated on jets of points equal iterated derivatives of f(P).
  for (unsigned s = 0; s < cfg.samples && nb > 0; ++s) {
    if (flavor == JetFlavor::arithmetic) {
      const unsigned top = cfg.precision + cfg.order;
      std::vector<TruncatedPadic> P;
      for (std::size_t i = 0; i < nb; ++i) P.emplace_back(p, top, static_cast<long>(rng() % 100000));
      const auto levels = jet_of_point(P, cfg.order);
      const unsigned N = levels.back().front().precision();
      const PadicRing R(p, N), Rtop(p, top);
      std::vector<TruncatedPadic> values;
      for (const auto& level : levels)
        for (const auto& x : level) values.push_back(x.reduce(N));
      // f(P) through the base variables of the jet.
      std::vector<TruncatedPadic> base_values(jet.vars.size(), Rtop.zero());
      for (std::size_t i = 0; i < nb; ++i) base_values[jet.index(i, 0)] = P[i];
      TruncatedPadic fk = jet.relations[0].evaluate_with<TruncatedPadic>(base_values, Rtop.one(),
                                                                         [&](const mpz_class& c) { return Rtop.from_mpz(c); });
      for (unsigned k = 0; k <= cfg.order; ++k) {
        if (k > 0) fk = delta_base(fk);
        const TruncatedPadic lhs =
            jet.relations[k].evaluate_with<TruncatedPadic>(values, R.one(), [&](const mpz_class& c) { return R.from_mpz(c); });
        if (!(lhs == fk.reduce(N))) w.add("point sample " + std::to_string(s) + " level " + std::to_string(k), lhs.to_string());
      }
    } else {
      const Variables tv{"t"};
      const CoeffRing<mpq_class> Q;
      std::vector<QPoly> P;
      for (std::size_t i = 0; i < nb; ++i) {
        QPoly c = QPoly::constant(tv, Q, static_cast<long>(rng() % 7) - 3);
        c = c + QPoly::variable(tv, Q, 0).scale(mpq_class(static_cast<long>(rng() % 7) - 3));
        c = c + QPoly::variable(tv, Q, 0).pow(2).scale(mpq_class(static_cast<long>(rng() % 5) - 2));
        P.push_back(c);
      }
      const auto levels = jet_of_point(P, cfg.order);
      std::vector<QPoly> values;
      for (const auto& level : levels)
        for (const auto& x : level) values.push_back(x);
      const QPoly one = QPoly::constant(tv, Q, 1);
      auto coeff = [&](const mpz_class& c) { return one.scale(mpq_class(c)); };
      std::vector<QPoly> base_values(jet.vars.size(), one.zero());
      for (std::size_t i = 0; i < nb; ++i) base_values[jet.index(i, 0)] = P[i];
      QPoly fk = jet.relations[0].evaluate_with<QPoly>(base_values, one, coeff);
      for (unsigned k = 0; k <= cfg.order; ++k) {
        if (k > 0) fk = fk.partial(0);
        const QPoly lhs = jet.relations[k].evaluate_with<QPoly>(values, one, coeff);
        if (!(lhs == fk)) w.add("point sample " + std::to_string(s) + " level " + std::to_string(k), lhs.to_string());
      }
    }
  }
  r.output = {{"poly", cfg.poly}, {"flavor", cfg.flavor}, {"order", cfg.order}, {"relations", rels}};
  w.finish(r);
}

// ---------------------------------------------------------------- Euler

using Triple = std::array<long, 3>;

// Flows are shared between the Euler checks of one run; built once per key.
class FlowCache {
 public:
  const ArithmeticFlow& get(const EulerSystem& sys, const Triple& a, bool gauged) {
    const auto key = std::make_tuple(sys.prime(), sys.precision(), a, gauged);
    std::shared_future<ArithmeticFlow> fut;
    std::promise<ArithmeticFlow> promise;
    bool builder = false;
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = map_.find(key);
      if (it == map_.end()) {
        fut = promise.get_future().share();
        map_.emplace(key, fut);
        builder = true;
      } else {
        fut = it->second;
      }
    }
    if (builder) {
      try {
        ArithmeticFlow f = gauged ? gauge_adjust(get(sys, a, false), sys).flow : build_flow(sys);
        promise.set_value(std::move(f));
      } catch (...) {
        promise.set_exception(std::current_exception());
      }
    }
    return fut.get();
  }

 private:
  std::mutex mu_;
  std::map<std::tuple<unsigned, unsigned, Triple, bool>, std::shared_future<ArithmeticFlow>> map_;
};

// Debug perturbation: u3 += x1 breaks the prime integrals and the
// linearization congruence.
ArithmeticFlow perturbed(const ArithmeticFlow& f) {
  ArithmeticFlow bad = f;
  bad.u[2] = bad.u[2] + PElement::variable(bad.chart, 0);
  return bad;
}

std::string triple_text(const Triple& a) {
  return std::to_string(a[0]) + "," + std::to_string(a[1]) + "," + std::to_string(a[2]);
}

std::string fiber_text(const std::array<unsigned, 2>& c) {
  return "c=(" + std::to_string(c[0]) + "," + std::to_string(c[1]) + ")";
}

struct EulerJobData {
  unsigned p = 0;
  Triple a{};
  bool valid = true;
  std::string skip_reason;
};

std::vector<EulerJobData> euler_triples(const RunConfig& cfg, unsigned p) {
  std::vector<EulerJobData> out;
  if (cfg.a.rfind("random:", 0) == 0) {
    const unsigned k = static_cast<unsigned>(std::stoul(cfg.a.substr(7)));
    std::mt19937_64 rng(derive_seed(cfg.seed, "a/" + std::to_string(p)));
    for (unsigned i = 0; i < k; ++i) out.push_back({p, sample_triple(p, rng), true, ""});
    return out;
  }
  for (const auto& t : split_list(cfg.a, ';')) {
    const auto parts = split_list(t, ',');
    EulerJobData d{p, {std::stol(parts[0]), std::stol(parts[1]), std::stol(parts[2])}, true, ""};
    auto md = [p](long v) { return ((v % static_cast<long>(p)) + p) % p; };
    if (md(d.a[0] - d.a[1]) == 0 || md(d.a[1] - d.a[2]) == 0 || md(d.a[0] - d.a[2]) == 0) {
      d.valid = false;
      d.skip_reason = "a is not pairwise distinct mod " + std::to_string(p);
    }
    out.push_back(d);
  }
  return out;
}

// Fibers for one system: a seeded sample of the admissible residues or the
// explicit list; inadmissible explicit fibers are reported, not run.
std::vector<std::array<unsigned, 2>> euler_fibers(const RunConfig& cfg, const EulerSystem& sys, const Triple& a,
                                                  nlohmann::json& rejected) {
  const unsigned p = sys.prime();
  if (cfg.fibers.rfind("sample:", 0) == 0) {
    const unsigned k = static_cast<unsigned>(std::stoul(cfg.fibers.substr(7)));
    auto all = admissible_residues(sys);
    std::mt19937_64 rng(derive_seed(cfg.seed, "c/" + std::to_string(p) + "/" + triple_text(a)));
    std::shuffle(all.begin(), all.end(), rng);
    if (all.size() > k) all.resize(k);
    std::sort(all.begin(), all.end());
    return all;
  }
  std::vector<std::array<unsigned, 2>> out;
  for (const auto& t : split_list(cfg.fibers, ',')) {
    const auto parts = split_list(t, ':');
    const std::array<unsigned, 2> c{static_cast<unsigned>(std::stoul(parts[0]) % p),
                                    static_cast<unsigned>(std::stoul(parts[1]) % p)};
    if (is_admissible(sys, c[0], c[1])) {
      out.push_back(c);
    } else {
      rejected.push_back(fiber_text(c));
    }
  }
  return out;
}

nlohmann::json fibers_json(const std::vector<std::array<unsigned, 2>>& f) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& c : f) j.push_back({c[0], c[1]});
  return j;
}

// A(c) mod p from the integer expansion of F^((p-1)/2), independent of the
// polynomial machinery.
long hasse_oracle(long p, const Triple& a, long c1, long c2) {
  auto md = [p](long v) { return ((v % p) + p) % p; };
  const long al = md(a[1] - a[2]), be = md(c1 - a[1] * c2), ga = md(a[2] - a[0]), de = md(a[0] * c2 - c1);
  std::vector<long> f{md(be * de), md(al * de + be * ga), md(al * ga)};
  std::vector<long> acc{1};
  for (long k = 0; k < (p - 1) / 2; ++k) {
    std::vector<long> nx(acc.size() + 2, 0);
    for (std::size_t i = 0; i < acc.size(); ++i)
      for (std::size_t j = 0; j < 3; ++j) nx[i + j] = md(nx[i + j] + acc[i] * f[j]);
    acc = nx;
  }
  return acc[static_cast<std::size_t>((p - 1) / 2)];
}

void euler_check(const std::string& id, const RunConfig& cfg, const EulerJobData& d, FlowCache& cache,
                 CheckResult& r) {
  const unsigned p = d.p;
  const EulerSystem sys(p, cfg.precision, d.a);
  nlohmann::json rejected = nlohmann::json::array();
  Witness w;
  r.output = nlohmann::json::object();

  if (id == "euler.hasse") {
    const auto fibers = euler_fibers(cfg, sys, d.a, rejected);
    r.output["hasse"] = hasse_invariant(sys).to_string();
    r.output["fibers"] = fibers_json(fibers);
    for (const auto& c : fibers) {
      const long got = sys.A_at(TruncatedPadic(p, 1, static_cast<long>(c[0])), TruncatedPadic(p, 1, static_cast<long>(c[1])))
                           .residue();
      const long want = hasse_oracle(p, d.a, c[0], c[1]);
      if (got != want) w.add(fiber_text(c), "A(c)=" + std::to_string(got) + " expected " + std::to_string(want));
    }
  } else if (id == "euler.build") {
    ArithmeticFlow flow = cache.get(sys, d.a, false);
    if (cfg.perturb) flow = perturbed(flow);
    const auto res = prime_integral_residuals(flow, sys);
    for (int j = 0; j < 2; ++j)
      if (!res[j].is_zero()) w.add("phi(H" + std::to_string(j + 1) + ") - H" + std::to_string(j + 1) + "^p", res[j].to_string());
    nlohmann::json u = nlohmann::json::array();
    for (const auto& ui : flow.u) u.push_back(ui.to_string().size() > 400 ? ui.to_string().substr(0, 400) + "..." : ui.to_string());
    r.output["u"] = u;
  } else if (id == "euler.linearization" || id == "euler.new2") {
    ArithmeticFlow flow = cache.get(sys, d.a, true);
    if (cfg.perturb) flow = perturbed(flow);
    const auto fibers = euler_fibers(cfg, sys, d.a, rejected);
    r.output["fibers"] = fibers_json(fibers);
    nlohmann::json ap = nlohmann::json::array();
    for (const auto& c : fibers) {
      const auto fiber = make_fiber(sys, c[0], c[1]);
      if (id == "euler.linearization") {
        const PElement res = verify_linearization(flow, sys, fiber);
        if (!res.is_zero()) w.add(fiber_text(c), res.to_string());
      } else {
        const PElement res = derive_new2_form(flow, sys, fiber);
        if (!res.is_zero()) w.add(fiber_text(c) + " k=A(c)", res.to_string());
        const auto pc = count_points_and_ap(sys, c[0], c[1]);
        ap.push_back(pc.ap);
        const PElement res2 = derive_new2_form(flow, sys, fiber, pc.ap);
        if (!res2.is_zero()) w.add(fiber_text(c) + " k=a_p", res2.to_string());
      }
    }
    if (id == "euler.new2") r.output["ap"] = ap;
  } else if (id == "euler.new1") {
    ArithmeticFlow flow = cache.get(sys, d.a, true);
    if (cfg.perturb) flow = perturbed(flow);
    const auto levels = admissible_levels(sys);
    r.output["levels"] = levels;
    for (unsigned c2 : levels) {
      const PElement res = verify_new1(flow, sys, teichmuller(p, c2, cfg.precision));
      if (!res.is_zero()) w.add("c2=" + std::to_string(c2), res.to_string());
    }
  } else if (id == "euler.ap") {
    const auto fibers = euler_fibers(cfg, sys, d.a, rejected);
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& c : fibers) {
      const auto pc = count_points_and_ap(sys, c[0], c[1]);
      rows.push_back({{"c", {c[0], c[1]}}, {"count", pc.count}, {"ap", pc.ap}, {"A", pc.hasse_value}});
      if (!pc.congruent) w.add(fiber_text(c), "a_p=" + std::to_string(pc.ap) + " A(c)=" + std::to_string(pc.hasse_value));
      if (!pc.hasse_bound) w.add(fiber_text(c), "|a_p|=" + std::to_string(std::labs(pc.ap)) + " exceeds 2 sqrt(p)");
    }
    r.output["points"] = rows;
  }
  if (!rejected.empty()) r.output["inadmissible_fibers"] = rejected;
  w.finish(r);
}

// ---------------------------------------------------------------- Lax

void lax_star(const RunConfig& cfg, unsigned p, unsigned n, CheckResult& r, std::mt19937_64& rng) {
  const unsigned N = cfg.precision;
  Witness w;
  for (unsigned s = 0; s < cfg.samples; ++s) {
    const TorusPoint h = random_torus(n, p, N, rng, s % 2 == 0);
    const PMatrix g = random_invertible(n, p, N, rng);
    const PMatrix x = conj(h, g);
    const PMatrix y = frobenius_star(x);
    if (!(y == conj(phi0(h), phi0_entrywise(g)))) w.add("sample " + std::to_string(s), y.to_string());
    // Another decomposition of x: g' = d perm g with h permuted.
    const TorusPoint dt = random_torus(n, p, N, rng, false);
    PMatrix perm(n, p, N);
    for (std::size_t i = 0; i < n; ++i) perm(i, (i + 1) % n) = perm.one();
    TorusPoint hp;
    for (std::size_t i = 0; i < n; ++i) hp.t.push_back(h.t[(i + 1) % n]);
    const PMatrix g2 = dt.matrix() * perm * g;
    if (!(conj(hp, g2) == x)) throw InternalError("second decomposition does not reproduce x");
    const PMatrix y2 = frobenius_star(hp, g2);
    if (!(y2 == y)) w.add("gauge sample " + std::to_string(s), y2.to_string());
  }
  w.finish(r);
}

void lax_star_star(const RunConfig& cfg, unsigned p, unsigned n, CheckResult& r, std::mt19937_64& rng) {
  const unsigned N = cfg.precision;
  Witness w;
  for (unsigned s = 0; s < cfg.samples; ++s) {
    const PMatrix x = random_regular(n, p, N, rng);
    const PMatrix y = frobenius_star_star(x);
    const auto P = x.char_poly(), Q = y.char_poly();
    for (std::size_t j = 0; j < n; ++j)
      if (!(Q[j] == P[j].pow(p))) w.add("sample " + std::to_string(s) + " P" + std::to_string(j + 1), Q[j].to_string());
    const auto R = conjugate_lift(y, random_matrix(n, p, N, rng)).char_poly();
    for (std::size_t j = 0; j < n; ++j)
      if (!(R[j] == Q[j])) w.add("lift sample " + std::to_string(s) + " P" + std::to_string(j + 1), R[j].to_string());
  }
  w.finish(r);
}

void lax_spectrum(const RunConfig& cfg, unsigned p, unsigned n, CheckResult& r, std::mt19937_64& rng) {
  const unsigned N = cfg.precision;
  Witness w;
  for (unsigned s = 0; s < cfg.samples; ++s) {
    const PMatrix x = conj(random_torus(n, p, N, rng, true), random_teichmuller_invertible(n, p, N, rng));
    if (!(frobenius_star(x) == x)) throw InternalError("constructed point is not fixed");
    if (!spectrum_delta_constant_check(x)) w.add("sample " + std::to_string(s), x.to_string());
  }
  w.finish(r);
}

}  // namespace

std::string to_string(Status s) {
  switch (s) {
    case Status::pass: return "pass";
    case Status::fail: return "fail";
    case Status::skip: return "skip";
    case Status::error: return "error";
  }
  return "error";
}

std::vector<std::string> available_checks() { return kChecks; }

std::vector<std::string> expand_checks(const std::vector<std::string>& names) {
  std::set<std::string> picked;
  for (const auto& name : names) {
    if (name == "all") {
      picked.insert(kChecks.begin(), kChecks.end());
      continue;
    }
    bool hit = false;
    for (const auto& id : kChecks) {
      if (id == name || id.rfind(name + ".", 0) == 0) {
        picked.insert(id);
        hit = true;
      }
    }
    if (!hit) throw ConfigError("unknown check '" + name + "'");
  }
  // Registry order, not alphabetical, so related checks stay together.
  std::vector<std::string> out;
  for (const auto& id : kChecks)
    if (picked.count(id)) out.push_back(id);
  return out;
}

std::vector<Job> plan_jobs(const RunConfig& cfg) {
  std::vector<Job> jobs;
  auto cache = std::make_shared<FlowCache>();
  auto add = [&](const std::string& id, nlohmann::json params, std::function<void(CheckResult&, std::mt19937_64&)> body) {
    std::string key = id + params.dump();
    jobs.push_back({id, std::move(params), derive_seed(cfg.seed, key), std::move(body)});
  };
  for (const auto& id : cfg.checks) {
    if (id == "classical.euler") {
      add(id, nlohmann::json::object(), [](CheckResult& r, std::mt19937_64&) { classical_euler(r); });
      continue;
    }
    if (id == "classical.lax") {
      for (unsigned n : cfg.sizes) {
        add(id, {{"n", n}}, [n](CheckResult& r, std::mt19937_64& rng) {
          if (n > 3) {
            r.status = Status::skip;
            r.output = {{"reason", "symbolic check limited to n <= 3"}};
            return;
          }
          classical_lax(n, r, rng);
        });
      }
      continue;
    }
    for (unsigned p : cfg.primes) {
      if (id == "padic.laws") {
        add(id, {{"p", p}, {"N", cfg.precision}}, [&cfg, p](CheckResult& r, std::mt19937_64& rng) { padic_laws(cfg, p, r, rng); });
      } else if (id == "classical.symplectic") {
        add(id, {{"p", p}}, [&cfg, p](CheckResult& r, std::mt19937_64& rng) { classical_symplectic(cfg, p, r, rng); });
      } else if (id == "classical.poisson") {
        add(id, {{"p", p}}, [&cfg, p](CheckResult& r, std::mt19937_64& rng) { classical_poisson(cfg, p, r, rng); });
      } else if (id == "jets.prolong") {
        add(id, {{"p", p}}, [&cfg, p](CheckResult& r, std::mt19937_64& rng) { jets_prolong(cfg, p, r, rng); });
      } else if (id.rfind("euler.", 0) == 0) {
        for (const auto& d : euler_triples(cfg, p)) {
          add(id, {{"p", p}, {"N", cfg.precision}, {"a", d.a}}, [&cfg, id, d, cache](CheckResult& r, std::mt19937_64&) {
            if (!d.valid) {
              r.status = Status::skip;
              r.output = {{"reason", d.skip_reason}};
              return;
            }
            euler_check(id, cfg, d, *cache, r);
          });
        }
      } else if (id.rfind("lax.", 0) == 0) {
        for (unsigned n : cfg.sizes) {
          add(id, {{"p", p}, {"N", cfg.precision}, {"n", n}}, [&cfg, id, p, n](CheckResult& r, std::mt19937_64& rng) {
            if (id != "lax.star_star" && n > p - 1) {
              r.status = Status::skip;
              r.output = {{"reason", "needs n <= p - 1 distinct residues"}};
              return;
            }
            if (id == "lax.star") {
              lax_star(cfg, p, n, r, rng);
            } else if (id == "lax.star_star") {
              lax_star_star(cfg, p, n, r, rng);
            } else {
              lax_spectrum(cfg, p, n, r, rng);
            }
          });
        }
      }
    }
  }
  return jobs;
}

}  // namespace deltaflow::cli
