#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "house/model.hpp"
#include "house/trainer.hpp"

namespace house {

enum class Command { kTrain, kEval, kTestProps, kGenSynth };

// Exit codes for the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;      // valid spec, failed while running
inline constexpr int kExitUnknownFlag = 2;  // unknown flag / bad usage
inline constexpr int kExitOutOfRange = 3;   // value outside its legal range
inline constexpr int kExitMissingPath = 4;  // required path not supplied

struct CliError : std::runtime_error {
  int exit_code;
  CliError(int code, const std::string& msg)
      : std::runtime_error(msg), exit_code(code) {}
};

// Thrown when --help is requested; carries the text to print (exit 0).
struct CliHelp {
  std::string text;
};

struct RunSpec {
  Command command = Command::kTrain;
  std::string data;        // dataset directory
  std::string checkpoint;  // model file: required for eval, resume for train
  std::string out_dir = ".";
  Variant variant = Variant::kHouse;
  bool variant_given = false;
  int d = 0;  // 0: resolve from the dataset's parameter budget preset
  int k = 4;
  int m = 1;
  bool k_given = false;
  bool m_given = false;
  TrainConfig train;    // batch/negatives/alpha/gamma/lr/lambda/steps/threads/seed
  int entities = 50;    // gen-synth
  bool stress_rmp = false;  // gen-synth: entangle symmetric pairs with N-to-1 heads
  int trials = 1000;    // test-props
};

// d*k parameter budget for a known benchmark directory name ("wn18rr" -> 800);
// 0 when the name is not a known benchmark.
int dataset_budget(const std::string& dataset_name);

// Parses argv[1:]; applies the config file (key=value lines; flags win),
// resolves the embedding width from the dataset preset when --d is absent,
// and validates ranges and required paths. Throws CliHelp for --help and
// CliError (carrying the exit code) for every rejected input.
RunSpec parse_run_spec(const std::vector<std::string>& args);

// Executes a parsed spec. Progress and reports go to `out`, warnings to
// `err`. Returns a process exit code.
int run(const RunSpec& spec, std::ostream& out, std::ostream& err);

// parse + run + error reporting; the body of main().
int cli_main(int argc, const char* const* argv);

}  // namespace house
