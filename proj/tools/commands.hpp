#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace stla::cli {

// Exit codes are part of the tool contract so CI can assert classification
// outcomes without parsing output.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDomainError = 2,
  kInconclusive = 3,
  kDegenerateGradient = 4,
  kDiverged = 5,
  kUnreached = 6,
  kScanViolation = 7,
};

struct CommonOptions {
  std::string example;        // registry name, or
  std::string input;          // path to a JSON system file (exactly one of the two)
  std::vector<double> point;  // optional point override
  double tol = 1e-9;
  std::string out_dir = ".";
  bool json = false;
  double ex3_radius = 2.0;
};

struct AnalyzeOptions {
  CommonOptions common;
};

struct SimulateOptions {
  CommonOptions common;
  double t = 0.1;      // leg duration; the trajectory covers [0, 2t]
  double step = 0.0;   // 0 selects t/1000
  bool witness = true;  // controls always come from the classifier
};

struct MintimeOptions {
  CommonOptions common;
  std::string deltas = "1e-4:1e-1:8";  // LO:HI:N, log spaced
  std::string dirs = "normal";
  double horizon = 1.0;
  double step = 1e-3;
  int switch_count = 32;
  int random_pairs = 16;
};

struct ScanOptions {
  CommonOptions common;
  double box = 0.1;
  int grid = 5;
  double rho = 0.5;
};

struct ExamplesOptions {
  bool json = false;
};

int run_analyze(const AnalyzeOptions& options, std::ostream& out, std::ostream& err);
int run_simulate(const SimulateOptions& options, std::ostream& out, std::ostream& err);
int run_mintime(const MintimeOptions& options, std::ostream& out, std::ostream& err);
int run_scan(const ScanOptions& options, std::ostream& out, std::ostream& err);
int run_examples(const ExamplesOptions& options, std::ostream& out, std::ostream& err);

/// Full argv-level entry point used by the binary and the test suites.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace stla::cli
