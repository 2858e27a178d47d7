#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "cgdist/harness.hpp"

using namespace cgdist;

namespace {

struct Options {
  RunConfig config;
  double epsilon = 0;
  std::vector<double> window;
  bool json = false;
  bool csv = false;
  std::string cache_dir;
  std::string out;
  std::string input;
  std::string manifest;
  std::string calibration;
  std::string id;
  double theta = 1.0;
  double kappa = 0.0;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--delta", o.config.delta, "Target width of the chosen curve")->capture_default_str();
  cmd->add_option("--epsilon", o.epsilon, "Thin-thick threshold (default delta^2/4)");
  cmd->add_option("--step", o.config.step, "Grid step along the flow")->capture_default_str();
  cmd->add_option("--margin", o.config.margin, "Window margin beyond ln(n)/2")->capture_default_str();
  cmd->add_option("--window", o.window, "Explicit window LO HI")->expected(2);
  cmd->add_option("--sc-bound", o.config.sc_bound, "Saddle-connection length budget")->capture_default_str();
  cmd->add_option("--budget", o.config.budget, "Witness-search chord budget")->capture_default_str();
  cmd->add_option("--max-depth", o.config.max_depth, "Witness-search path length")->capture_default_str();
  cmd->add_option("--seed", o.config.seed, "Seed (recorded; every pipeline is deterministic)");
  auto* j = cmd->add_flag("--json", o.json, "JSON output");
  cmd->add_flag("--csv", o.csv, "CSV output")->excludes(j);
  cmd->add_option("--cache-dir", o.cache_dir, "Result cache directory");
  cmd->add_option("--out", o.out, "Output file (default stdout)");
}

RunConfig finish(Options& o, CLI::App* cmd) {
  RunConfig c = o.config;
  if (cmd->count("--epsilon")) c.epsilon = o.epsilon;
  if (!o.window.empty()) c.window = Window{o.window[0], o.window[1]};
  if (o.json) c.mode = OutputMode::json;
  if (o.csv) c.mode = OutputMode::csv;
  c.estimator();  // validates
  return c;
}

std::vector<Instance> select(std::vector<Instance> manifest, const std::string& id) {
  if (id.empty()) return manifest;
  for (auto& inst : manifest) {
    if (inst.id == id) return {std::move(inst)};
  }
  throw InputError("no instance with id '" + id + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Curve-graph distance estimates from square-tiled surfaces and the Teichmueller flow"};
  app.require_subcommand(1);
  Options o;

  auto* est = app.add_subcommand("estimate", "Estimate d(xi, zeta) for every manifest instance (JSONL)");
  est->add_option("manifest", o.input, "Manifest JSON")->required();
  est->add_option("--calibration", o.calibration, "Output of 'calibrate' supplying kappa and theta");
  est->add_option("--theta", o.theta, "Lower-bound constant")->capture_default_str();
  est->add_option("--kappa", o.kappa, "Upper-bound constant")->capture_default_str();
  auto* cal = app.add_subcommand("calibrate", "Calibrate kappa and theta on a corpus with known distances");
  cal->add_option("manifest", o.input, "Manifest JSON")->required();
  auto* tr = app.add_subcommand("trace", "Per-sample plot data (CSV)");
  tr->add_option("manifest", o.input, "Manifest JSON")->required();
  tr->add_option("--id", o.id, "Instance to trace");
  auto* orc = app.add_subcommand("oracle", "Exact or bounded d(xi, zeta) per instance (JSONL)");
  orc->add_option("manifest", o.input, "Manifest JSON")->required();
  auto* val = app.add_subcommand("validate", "Re-check stored estimate reports");
  val->add_option("report", o.input, "Report JSONL")->required();
  val->add_option("--manifest", o.manifest, "Manifest to recompute traces and check separation");
  for (auto* cmd : {est, cal, tr, orc, val}) add_common(cmd, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    auto* cmd = app.get_subcommands().front();
    const RunConfig config = finish(o, cmd);
    std::ofstream file;
    if (!o.out.empty()) {
      file.open(o.out);
      if (!file) throw InputError(o.out + ": cannot open for writing");
    }
    std::ostream& out = o.out.empty() ? std::cout : file;
    const Cache cache(o.cache_dir.empty() ? std::nullopt : std::optional<std::filesystem::path>(o.cache_dir));

    if (cmd == est) {
      Constants k{o.theta, o.kappa};
      if (!o.calibration.empty()) {
        const auto cal_doc = parse_json_file(o.calibration);
        if (!cal_doc.contains("theta") || !cal_doc["theta"].is_number() || !cal_doc.contains("kappa") ||
            !cal_doc["kappa"].is_number()) {
          throw InputError(o.calibration + ": expected numeric fields 'theta' and 'kappa'");
        }
        if (!est->count("--theta")) k.theta = cal_doc["theta"].get<double>();
        if (!est->count("--kappa")) k.kappa = cal_doc["kappa"].get<double>();
      }
      return run_estimate(config, read_manifest(o.input), k, cache, out, std::cerr);
    }
    if (cmd == cal) return run_calibrate(config, read_manifest(o.input), out, std::cerr);
    if (cmd == tr) return run_trace(config, select(read_manifest(o.input), o.id), out, std::cerr);
    if (cmd == orc) return run_oracle(config, read_manifest(o.input), out, std::cerr);
    std::optional<std::vector<Instance>> manifest;
    if (!o.manifest.empty()) manifest = read_manifest(o.manifest);
    return run_validate(config, read_jsonl(o.input), manifest, out, std::cerr);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
