#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "deltaflow/errors.hpp"

namespace deltaflow::cli {

inline constexpr const char* kToolName = "deltaflow";
inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kPass = 0, kCheckFailure = 1, kUsage = 2, kInternal = 3 };

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct RunConfig {
  std::vector<unsigned> primes{5};
  unsigned precision = 3;
  // "random:k" or explicit triples "a1,a2,a3" separated by ';'.
  std::string a = "random:1";
  // "sample:k" or explicit residue pairs "c1:c2" separated by ','.
  std::string fibers = "sample:10";
  unsigned samples = 20;
  std::uint64_t seed = 1;
  std::string out;
  std::vector<std::string> checks;
  bool perturb = false;
  // Lax matrix sizes.
  std::vector<unsigned> sizes{2, 3};
  // Jet prolongation.
  std::string poly = "x^2";
  unsigned order = 2;
  std::string flavor = "arithmetic";
  unsigned threads = 0;
};

// key=value lines; "[section]" headers prefix nothing but must be one of the
// known sections; '#' starts a comment.
RunConfig parse_config(const std::string& text);
RunConfig parse_config_file(const std::string& path);
// Set one key from its textual value; ConfigError on unknown keys or bad values.
void apply_option(RunConfig& cfg, const std::string& key, const std::string& value);
// Sort and deduplicate primes and checks, expand families, validate.
void normalize(RunConfig& cfg);
nlohmann::json to_json(const RunConfig& cfg);

// Stable seeding: splitmix64 over the master seed xor FNV-1a of the id.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a(const std::string& s);
std::uint64_t derive_seed(std::uint64_t master, const std::string& id);

enum class Status { pass, fail, skip, error };
std::string to_string(Status s);

struct CheckResult {
  std::string id;
  nlohmann::json params = nlohmann::json::object();
  Status status = Status::pass;
  std::string residual;
  nlohmann::json output;
  double elapsed_ms = 0;
};

struct Report {
  nlohmann::json config;
  std::vector<CheckResult> checks;

  std::size_t count(Status s) const;
  int exit_code() const;
  nlohmann::json to_json(bool with_timing = true) const;
  std::string summary() const;
};

// Every registered check id, e.g. "euler.build"; families are the prefixes.
std::vector<std::string> available_checks();
// Families or ids to ids; ConfigError on unknown names.
std::vector<std::string> expand_checks(const std::vector<std::string>& names);

Report run(const RunConfig& cfg);

// Entry point shared by the tool and the tests.
int main_entry(int argc, char** argv);

}  // namespace deltaflow::cli
