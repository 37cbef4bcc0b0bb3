#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "deltaflow/cli.hpp"

namespace deltaflow::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

unsigned long parse_unsigned(const std::string& key, const std::string& v) {
  if (v.empty() || !std::all_of(v.begin(), v.end(), [](unsigned char c) { return std::isdigit(c); })) {
    throw ConfigError("malformed value for " + key + ": '" + v + "'");
  }
  try {
    return std::stoul(v);
  } catch (const std::exception&) {
    throw ConfigError("value out of range for " + key + ": '" + v + "'");
  }
}

bool is_prime(unsigned n) {
  if (n < 2) return false;
  for (unsigned d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

const std::vector<std::string> kSections{"run", "euler", "lax", "jet"};

}  // namespace

void apply_option(RunConfig& cfg, const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "p" || key == "primes") {
    cfg.primes.clear();
    for (const auto& s : split(v, ',')) {
      const auto q = parse_unsigned(key, s);
      if (!is_prime(static_cast<unsigned>(q))) throw ConfigError(s + " is not a prime");
      if (q == 2) throw ConfigError("p = 2 is not allowed; only odd primes");
      cfg.primes.push_back(static_cast<unsigned>(q));
    }
    if (cfg.primes.empty()) throw ConfigError("empty prime list");
  } else if (key == "prec" || key == "precision") {
    cfg.precision = static_cast<unsigned>(parse_unsigned(key, v));
  } else if (key == "a") {
    if (v.rfind("random:", 0) != 0) {
      for (const auto& t : split(v, ';')) {
        const auto parts = split(t, ',');
        if (parts.size() != 3) throw ConfigError("a needs three comma-separated integers: '" + t + "'");
        for (const auto& x : parts) {
          try {
            std::size_t used = 0;
            std::stol(x, &used);
            if (used != x.size()) throw std::invalid_argument(x);
          } catch (const std::exception&) {
            throw ConfigError("malformed value for a: '" + x + "'");
          }
        }
      }
    } else {
      parse_unsigned(key, v.substr(7));
    }
    cfg.a = v;
  } else if (key == "c" || key == "fibers") {
    if (v.rfind("sample:", 0) == 0) {
      parse_unsigned(key, v.substr(7));
    } else {
      for (const auto& t : split(v, ',')) {
        const auto parts = split(t, ':');
        if (parts.size() != 2) throw ConfigError("fiber needs the form c1:c2: '" + t + "'");
        parse_unsigned(key, parts[0]);
        parse_unsigned(key, parts[1]);
      }
    }
    cfg.fibers = v;
  } else if (key == "samples") {
    cfg.samples = static_cast<unsigned>(parse_unsigned(key, v));
  } else if (key == "seed") {
    cfg.seed = parse_unsigned(key, v);
  } else if (key == "out") {
    cfg.out = v;
  } else if (key == "checks") {
    cfg.checks = split(v, ',');
  } else if (key == "perturb") {
    if (v == "1" || v == "true" || v == "yes") {
      cfg.perturb = true;
    } else if (v == "0" || v == "false" || v == "no") {
      cfg.perturb = false;
    } else {
      throw ConfigError("malformed value for perturb: '" + v + "'");
    }
  } else if (key == "n") {
    cfg.sizes.clear();
    for (const auto& s : split(v, ',')) {
      const auto q = parse_unsigned(key, s);
      if (q < 2 || q > 6) throw ConfigError("matrix size must be between 2 and 6");
      cfg.sizes.push_back(static_cast<unsigned>(q));
    }
  } else if (key == "poly") {
    if (v.empty()) throw ConfigError("empty polynomial");
    cfg.poly = v;
  } else if (key == "order") {
    cfg.order = static_cast<unsigned>(parse_unsigned(key, v));
  } else if (key == "flavor") {
    if (v != "classical" && v != "arithmetic") throw ConfigError("flavor must be classical or arithmetic");
    cfg.flavor = v;
  } else if (key == "threads") {
    cfg.threads = static_cast<unsigned>(parse_unsigned(key, v));
  } else {
    throw ConfigError("unknown key '" + key + "'");
  }
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string line;
  unsigned lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
      const std::string name = trim(line.substr(1, line.size() - 2));
      if (std::find(kSections.begin(), kSections.end(), name) == kSections.end()) {
        throw ConfigError("line " + std::to_string(lineno) + ": unknown section '" + name + "'");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    try {
      apply_option(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void normalize(RunConfig& cfg) {
  std::sort(cfg.primes.begin(), cfg.primes.end());
  cfg.primes.erase(std::unique(cfg.primes.begin(), cfg.primes.end()), cfg.primes.end());
  std::sort(cfg.sizes.begin(), cfg.sizes.end());
  cfg.sizes.erase(std::unique(cfg.sizes.begin(), cfg.sizes.end()), cfg.sizes.end());
  cfg.checks = expand_checks(cfg.checks);
  const bool arithmetic = std::any_of(cfg.checks.begin(), cfg.checks.end(), [](const std::string& id) {
    return id.rfind("euler.", 0) == 0 || id.rfind("lax.", 0) == 0 || id == "padic.laws";
  });
  if (arithmetic && cfg.precision < 3) throw ConfigError("arithmetic checks need precision >= 3");
}

nlohmann::json to_json(const RunConfig& cfg) {
  return {{"primes", cfg.primes},   {"precision", cfg.precision}, {"a", cfg.a},
          {"fibers", cfg.fibers},   {"samples", cfg.samples},     {"seed", cfg.seed},
          {"checks", cfg.checks},   {"perturb", cfg.perturb},     {"n", cfg.sizes},
          {"poly", cfg.poly},       {"order", cfg.order},         {"flavor", cfg.flavor}};
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t master, const std::string& id) { return splitmix64(master ^ fnv1a(id)); }

}  // namespace deltaflow::cli
