#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

namespace flame::cli {

enum ExitCode : int {
  kSuccess = 0,
  kInputError = 1,
  kEmptyEvaluation = 2,
};

struct EvalArgs {
  std::filesystem::path dataset;
  std::filesystem::path predictions;
  std::string mode = "flame";
  std::optional<std::filesystem::path> out;
  /// Overrides manifest latencies for the frames it lists.
  std::optional<std::filesystem::path> latency_trace;
  unsigned jobs = 0;
};

int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err);
int cmd_synth(const std::filesystem::path& spec, const std::filesystem::path& out_dir,
              std::ostream& out, std::ostream& err);
int cmd_offset(std::string_view latency_ms, std::string_view interval_ms, std::ostream& out,
               std::ostream& err);

/// Parses argv and dispatches to a subcommand.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace flame::cli
