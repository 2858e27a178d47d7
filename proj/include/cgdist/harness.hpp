#pragma once

// Command-line plumbing: run configuration, corpus manifests, the JSON and
// CSV record formats, the content-addressed result cache, and the
// subcommands themselves. The executable in tools/ only parses flags.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cgdist/estimator.hpp"

namespace cgdist {

/// Malformed input or violated invariant; maps to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class OutputMode { json, csv };

struct RunConfig {
  double delta = 0.1;
  std::optional<double> epsilon;  ///< defaults to delta^2 / 4
  double step = 0.1;
  double margin = 2.0;
  double sc_bound = 2.0;
  int budget = 6;
  int max_depth = 4;
  std::uint64_t seed = 0;
  std::optional<Window> window;
  std::optional<OutputMode> mode;

  /// Throws InputError on violated invariants.
  EstimatorConfig estimator() const;
};

struct Instance {
  std::string id;
  std::optional<std::pair<Slope, Slope>> torus;  ///< set for torus slope pairs
  int n = 0;
  Cycles h, v;  ///< set for origami specs
  std::optional<int> oracle;

  std::shared_ptr<const Origami> build() const;
  /// Sorted-key canonical form of the instance, without its id.
  nlohmann::json canonical() const;
};

/// Accepts a single instance object, an array of instances, or an object
/// with an "instances" array. Throws InputError with field context.
std::vector<Instance> parse_manifest(const nlohmann::json& doc);
std::vector<Instance> read_manifest(const std::filesystem::path& path);
nlohmann::json parse_json_file(const std::filesystem::path& path);

/// FNV-1a over the canonical serialization of instance and config. The seed
/// is excluded: every pipeline is deterministic.
std::string cache_key(const std::string& subcommand, const Instance& instance, const nlohmann::json& config);

class Cache {
 public:
  explicit Cache(std::optional<std::filesystem::path> dir) : dir_(std::move(dir)) {}
  /// Returns the stored record; a corrupt entry is reported and ignored.
  std::optional<nlohmann::json> get(const std::string& key, std::ostream& log) const;
  void put(const std::string& key, const nlohmann::json& value) const;

 private:
  std::optional<std::filesystem::path> dir_;
};

nlohmann::json config_json(const RunConfig& config);
nlohmann::json report_json(const std::string& id, const EstimateReport& report);

struct Constants {
  double theta = 1.0;
  double kappa = 0.0;
};

/// Each subcommand writes its records to `out`, diagnostics to `log`, and
/// returns the exit code: 0 success, 1 some instance failed.
int run_estimate(const RunConfig& config, const std::vector<Instance>& manifest, Constants constants,
                 const Cache& cache, std::ostream& out, std::ostream& log);
int run_calibrate(const RunConfig& config, const std::vector<Instance>& manifest, std::ostream& out,
                  std::ostream& log);
int run_trace(const RunConfig& config, const std::vector<Instance>& manifest, std::ostream& out, std::ostream& log);
int run_oracle(const RunConfig& config, const std::vector<Instance>& manifest, std::ostream& out, std::ostream& log);
/// Re-checks stored reports; with a manifest, the traces are recomputed and
/// the full separation and minimality checks run as well.
int run_validate(const RunConfig& config, const std::vector<nlohmann::json>& reports,
                 const std::optional<std::vector<Instance>>& manifest, std::ostream& out, std::ostream& log);

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

}  // namespace cgdist
