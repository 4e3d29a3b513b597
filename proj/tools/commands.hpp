#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "mosaic/config.hpp"

namespace mosaic::cli {

/// Command-line values that override configuration keys when given.
struct Overrides {
  std::string config;
  std::string data;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string grid;
  std::optional<double> phi;
  std::string phi_file;
  std::optional<double> alpha;
  std::optional<int> scenario;
  std::optional<long> replicates;
};

RunConfig resolve_config(const Overrides& o);

void cmd_fit(RunConfig config);
void cmd_select_phi(const RunConfig& config);
void cmd_predict(const std::filesystem::path& fit_dir, const std::filesystem::path& test_csv,
                 const std::filesystem::path& out_dir, std::optional<double> alpha);
void cmd_simulate(const RunConfig& config);
void cmd_summarize(const std::filesystem::path& fit_dir, std::optional<double> alpha);

}  // namespace mosaic::cli
