#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace sequtil::cli {

/// Exit codes: success or consistent, violation found, usage or input error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitViolation = 2;

struct RunConfig {
  std::string command;  // validate | check-axioms | extract | complete | solve | eval | simulate
  std::string input;
  std::string table;
  std::string policy;
  std::string pairs;
  std::string root;
  std::string level;   // memoryless | additive | path-oblivious | ordinal
  std::string target;  // affine | reward | potential
  std::string out;
  std::optional<std::size_t> horizon;
  std::optional<double> tolerance;
  std::optional<double> gamma;
  std::uint64_t seed = 0;
  std::size_t count = 1;
  std::size_t max_iterations = 1'000'000;
};

/// Runs one command. The result document goes to config.out, or to `out` when
/// no path is given; diagnostics go to `err`. Returns the exit code.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace sequtil::cli
