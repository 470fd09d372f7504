#ifndef THERMORPH_TOOLS_COMMANDS_HPP
#define THERMORPH_TOOLS_COMMANDS_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "thermorph/thermorph.hpp"

namespace thermorph::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kDataError = 3, kNotConverged = 4 };

/// Loads a run config and applies `key=value` overrides on top of it.
RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides);

int cmd_synth(const std::filesystem::path& spec_file, const std::filesystem::path& out_dir, std::ostream& out);
int cmd_background(const RunConfig& cfg, std::ostream& out);
int cmd_segment(const RunConfig& cfg, std::ostream& out);
int cmd_pipeline(const RunConfig& cfg, std::ostream& out);
int cmd_eval(const std::filesystem::path& pred, const std::filesystem::path& truth,
             const std::optional<RoiRect>& roi, const std::filesystem::path& report_path, std::ostream& out);

struct BenchOptions {
  std::vector<std::size_t> sizes{64, 128, 256};
  int repetitions = 3;
  std::uint64_t seed = 1;
  double h = 0.5;
  std::optional<std::filesystem::path> report;
};
int cmd_bench(const BenchOptions& opt, std::ostream& out);

/// Runs `fn`, mapping library errors to exit codes and printing them to `err`.
template <typename Fn>
int guarded(Fn&& fn, std::ostream& err);

int exit_code_for(const Error& e) noexcept;

}  // namespace thermorph::cli

#include <ostream>

template <typename Fn>
int thermorph::cli::guarded(Fn&& fn, std::ostream& err) {
  try {
    return fn();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

#endif  // THERMORPH_TOOLS_COMMANDS_HPP
