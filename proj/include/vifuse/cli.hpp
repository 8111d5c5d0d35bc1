#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vifuse/fuser.hpp"
#include "vifuse/metrics.hpp"

namespace vifuse::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kIo = 2, kNumeric = 3 };

enum class TableFormat { kCsv, kMarkdown };

// Effective parameters of one command invocation, after merging built-in
// defaults, the optional config file and command-line flags.
struct RunConfig {
  FuserConfig fuser;
  BaselineWeights baseline;
  std::optional<int> k;  // patch side; default floor(min(H, W) / 2)
  std::uint64_t seed = 0;
  unsigned jobs = 0;  // 0: logical CPU count
  TableFormat format = TableFormat::kCsv;
  bool baselines = false;
  bool masked = false;
  std::filesystem::path trace_path;
  std::filesystem::path metrics_path;
  std::filesystem::path out_path;

  nlohmann::json to_json() const;
};

// Aggregate of one bench run.
struct BenchReport {
  struct Row {
    std::string method;
    std::string stem;
    std::string path;  // fused image, relative to the output directory
    MetricsReport metrics;
  };
  std::vector<std::string> methods;
  std::vector<Row> rows;  // grouped by method, pairs in sorted stem order
  std::vector<std::string> skipped;
  nlohmann::json config;
  std::string version;

  // Arithmetic mean of the method's rows.
  MetricsReport mean(const std::string& method) const;
};

std::string engine_version();

// 64-bit FNV-1a, used to derive per-pair seeds from filename stems.
std::uint64_t stable_hash(const std::string& text);

// Entry point shared by the vifuse executable and the tests. Diagnostics go
// to `err` as single lines; table output (metrics command) goes to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Command implementations; they throw on failure and run() maps exceptions
// to exit codes.
void cmd_fuse(const std::filesystem::path& ir, const std::filesystem::path& vi,
              const std::filesystem::path& out, const RunConfig& cfg);
void cmd_ref(const std::filesystem::path& ir, const std::filesystem::path& vi,
             const std::filesystem::path& out_dir, const RunConfig& cfg);
void cmd_mask(const std::filesystem::path& ir, const std::filesystem::path& vi,
              const std::filesystem::path& out_dir, const RunConfig& cfg);
BenchReport cmd_bench(const std::filesystem::path& pairs_dir,
                      const std::filesystem::path& out_dir, const RunConfig& cfg,
                      std::ostream& err);
void cmd_metrics(const std::filesystem::path& fused, const std::filesystem::path& ir,
                 const std::filesystem::path& vi, const RunConfig& cfg, std::ostream& out);

}  // namespace vifuse::cli
