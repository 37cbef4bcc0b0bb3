#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "checks.hpp"

namespace deltaflow::cli {

std::size_t Report::count(Status s) const {
  return static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(), [s](const CheckResult& c) { return c.status == s; }));
}

int Report::exit_code() const {
  if (count(Status::error) > 0) return kInternal;
  if (count(Status::fail) > 0) return kCheckFailure;
  return kPass;
}

nlohmann::json Report::to_json(bool with_timing) const {
  nlohmann::json arr = nlohmann::json::array();
  double total = 0;
  for (const auto& c : checks) {
    nlohmann::json j{{"id", c.id}, {"params", c.params}, {"status", cli::to_string(c.status)}};
    if (!c.residual.empty()) j["residual"] = c.residual;
    if (!c.output.is_null()) j["output"] = c.output;
    if (with_timing) j["elapsed_ms"] = c.elapsed_ms;
    total += c.elapsed_ms;
    arr.push_back(std::move(j));
  }
  nlohmann::json out{{"tool", kToolName},
                     {"version", kVersion},
                     {"config", config},
                     {"checks", arr},
                     {"summary",
                      {{"total", checks.size()},
                       {"pass", count(Status::pass)},
                       {"fail", count(Status::fail)},
                       {"skip", count(Status::skip)},
                       {"error", count(Status::error)}}}};
  if (with_timing) out["summary"]["elapsed_ms"] = total;
  return out;
}

std::string Report::summary() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    os << std::left;
    os << (c.status == Status::pass ? "ok    " : c.status == Status::skip ? "skip  " : c.status == Status::fail ? "FAIL  " : "ERROR ");
    os << c.id << " " << c.params.dump();
    if (!c.residual.empty()) os << "\n      " << c.residual;
    os << "\n";
  }
  os << checks.size() << " checks: " << count(Status::pass) << " passed, " << count(Status::fail) << " failed, "
     << count(Status::skip) << " skipped, " << count(Status::error) << " errors\n";
  return os.str();
}

Report run(const RunConfig& cfg) {
  Report report;
  report.config = to_json(cfg);
  std::vector<Job> jobs = plan_jobs(cfg);
  report.checks.resize(jobs.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      Job& job = jobs[i];
      CheckResult r;
      r.id = job.id;
      r.params = job.params;
      std::mt19937_64 rng(job.seed);
      const auto start = std::chrono::steady_clock::now();
      try {
        job.body(r, rng);
      } catch (const InternalError& e) {
        r.status = Status::error;
        r.residual = std::string("internal: ") + e.what();
      } catch (const GaugeUnsolvable& e) {
        r.status = Status::fail;
        r.residual = std::string(e.what()) + ": " + e.witness();
      } catch (const Error& e) {
        r.status = Status::fail;
        r.residual = e.what();
      } catch (const std::exception& e) {
        r.status = Status::error;
        r.residual = std::string("internal: ") + e.what();
      }
      r.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      report.checks[i] = std::move(r);
    }
  };
  unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, jobs.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return report;
}

namespace {

struct Flags {
  std::optional<std::string> config, p, prec, a, c, samples, seed, out, checks, n, poly, order, flavor, threads;
  bool perturb = false;
};

void add_flags(CLI::App& app, Flags& f) {
  app.add_option("--config", f.config, "Config file (key=value)");
  app.add_option("--p", f.p, "Primes, comma separated");
  app.add_option("--prec", f.prec, "Precision N");
  app.add_option("--a", f.a, "Euler parameters: random:k or a1,a2,a3;...");
  app.add_option("--c", f.c, "Fibers: sample:k or c1:c2,...");
  app.add_option("--samples", f.samples, "Samples per property check");
  app.add_option("--seed", f.seed, "Master seed");
  app.add_option("--out", f.out, "JSON report path, '-' for stdout");
  app.add_option("--checks", f.checks, "Checks or families, comma separated");
  app.add_flag("--perturb", f.perturb, "Perturb Euler flows (debug)");
  app.add_option("--n", f.n, "Lax matrix sizes");
  app.add_option("--poly", f.poly, "Polynomial for jet prolongation");
  app.add_option("--order", f.order, "Jet order");
  app.add_option("--flavor", f.flavor, "classical or arithmetic");
  app.add_option("--threads", f.threads, "Worker threads, 0 for all cores");
}

void apply_flags(RunConfig& cfg, const Flags& f) {
  const std::pair<const char*, const std::optional<std::string>*> table[] = {
      {"p", &f.p},         {"prec", &f.prec},   {"a", &f.a},         {"c", &f.c},
      {"samples", &f.samples}, {"seed", &f.seed}, {"out", &f.out},   {"checks", &f.checks},
      {"n", &f.n},         {"poly", &f.poly},   {"order", &f.order}, {"flavor", &f.flavor},
      {"threads", &f.threads}};
  for (const auto& [key, value] : table)
    if (*value) apply_option(cfg, key, **value);
  if (f.perturb) cfg.perturb = true;
}

}  // namespace

int main_entry(int argc, char** argv) {
  CLI::App app{"Exact verification of classical and arithmetic differential algebra", kToolName};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Flags flags;
  add_flags(app, flags);

  // Subcommand -> default check selection; nullopt means "from config".
  std::optional<std::vector<std::string>> selection;
  auto sub = [&](CLI::App& parent, const std::string& name, const std::string& help,
                 std::optional<std::vector<std::string>> checks) {
    CLI::App* s = parent.add_subcommand(name, help);
    s->fallthrough();
    s->callback([&selection, checks] { selection = checks; });
    return s;
  };
  sub(app, "selftest", "Run every check at p=5, N=3", std::vector<std::string>{"all"});
  sub(app, "run", "Run the checks selected by config and flags", std::nullopt);
  sub(app, "hasse", "Hasse invariant against an integer expansion", std::vector<std::string>{"euler.hasse"});
  sub(app, "ap", "Point counts and a_p congruences", std::vector<std::string>{"euler.ap"});
  CLI::App* euler = app.add_subcommand("euler", "Arithmetic Euler flow");
  euler->fallthrough();
  euler->require_subcommand(1);
  sub(*euler, "build", "Build flows and check the prime integrals", std::vector<std::string>{"euler.build"});
  sub(*euler, "verify", "Linearization, sphere and a_p form congruences",
      std::vector<std::string>{"euler.build", "euler.linearization", "euler.new1", "euler.new2"});
  CLI::App* lax = app.add_subcommand("lax", "Arithmetic Lax equations");
  lax->fallthrough();
  lax->require_subcommand(1);
  sub(*lax, "verify", "Frobenius lift diagrams and spectra", std::vector<std::string>{"lax"});
  CLI::App* jet = app.add_subcommand("jet", "Jet spaces");
  jet->fallthrough();
  jet->require_subcommand(1);
  sub(*jet, "prolong", "Prolong a polynomial and check jets of points", std::vector<std::string>{"jets.prolong"});
  CLI::App* classical = app.add_subcommand("classical", "Classical Euler, Poisson and Lax identities");
  classical->fallthrough();
  classical->require_subcommand(1);
  sub(*classical, "verify", "Symbolic classical identities", std::vector<std::string>{"classical"});

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }

  RunConfig cfg;
  try {
    if (flags.config) cfg = parse_config_file(*flags.config);
    if (selection) cfg.checks = *selection;
    apply_flags(cfg, flags);
    normalize(cfg);
  } catch (const ConfigError& e) {
    std::cerr << kToolName << ": " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << kToolName << ": " << e.what() << "\n";
    return kUsage;
  }

  try {
    const Report report = run(cfg);
    const bool json_stdout = cfg.out == "-";
    (json_stdout ? std::cerr : std::cout) << report.summary();
    if (json_stdout) {
      std::cout << report.to_json().dump(2) << "\n";
    } else if (!cfg.out.empty()) {
      std::ofstream out(cfg.out);
      if (!out) {
        std::cerr << kToolName << ": cannot write " << cfg.out << "\n";
        return kUsage;
      }
      out << report.to_json().dump(2) << "\n";
    }
    for (const auto& c : report.checks)
      if (c.status == Status::error) std::cerr << kToolName << ": " << c.id << ": " << c.residual << "\n";
    return report.exit_code();
  } catch (const std::exception& e) {
    std::cerr << kToolName << ": internal error: " << e.what() << "\n";
    return kInternal;
  }
}

}  // namespace deltaflow::cli
