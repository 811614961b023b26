#pragma once

#include <string>

namespace fincat::scenario {

/// Size limits enforced while loading declarations. Defaults may be
/// overridden by the FINCAT_LIMITS environment variable and by the --limits
/// flag, both using the syntax "key=value[,key=value...]" with keys
/// carrier, group, stalk, presheaf.
struct Limits {
  long carrier = 64;    // quantale carrier size
  long group = 128;     // group order
  long stalk = 16;      // bundle stalk dimension
  long presheaf = 1L << 16;  // presheaf module element count

  /// Defaults merged with FINCAT_LIMITS (when set).
  static Limits from_env();
  /// Applies one "key=value[,...]" spec; throws std::invalid_argument on an
  /// unknown key or a malformed value.
  void apply(const std::string& spec);
};

/// Outcome of a scenario run or a selftest.
/// exit_code: 0 ok, 1 input error, 2 law violation / expectation mismatch.
struct RunResult {
  int exit_code = 0;
  std::string human;      // human-readable table, includes per-task timing
  std::string machine;    // canonical JSON (sorted keys), byte-deterministic
};

/// Parses and executes a scenario document (canonical JSON text).
RunResult run_scenario_text(const std::string& text, const Limits& limits,
                            bool parallel);
/// Reads the file and delegates to run_scenario_text.
RunResult run_scenario_file(const std::string& path, const Limits& limits,
                            bool parallel);

/// Deterministic randomized property suites over all modules. Prints
/// per-property pass counts; on a failure, writes a minimized counterexample
/// scenario (which re-fails under run_scenario_file) to counterexample_path.
RunResult selftest(long corpus_size, unsigned long long seed,
                   const Limits& limits, const std::string& counterexample_path);

}  // namespace fincat::scenario
