#include "cgdist/harness.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "cgdist/farey.hpp"

namespace cgdist {

using nlohmann::json;

EstimatorConfig RunConfig::estimator() const {
  EstimatorConfig c;
  c.delta = delta;
  c.epsilon = epsilon.value_or(delta * delta / 4);
  c.step = step;
  c.margin = margin;
  c.sc_bound = sc_bound;
  c.budget = budget;
  c.max_depth = max_depth;
  try {
    c.validate();
  } catch (const std::domain_error& e) {
    throw InputError(std::string("invalid configuration: ") + e.what());
  }
  if (window && !(window->lo <= window->hi)) throw InputError("invalid configuration: window lower end exceeds upper end");
  return c;
}

// ---------------------------------------------------------------------------
// Manifests

std::shared_ptr<const Origami> Instance::build() const {
  if (torus) return std::make_shared<const Origami>(torus_pair_origami(torus->first, torus->second));
  return std::make_shared<const Origami>(build_origami(n, h, v));
}

json Instance::canonical() const {
  if (torus) {
    return {{"surface", "T1"},
            {"xi", {torus->first.p, torus->first.q}},
            {"zeta", {torus->second.p, torus->second.q}}};
  }
  const auto o = build();
  return {{"n", n}, {"h", o->h_cycles()}, {"v", o->v_cycles()}};
}

namespace {

std::string where(std::size_t index, const std::string& id) {
  return "instance " + std::to_string(index) + (id.empty() ? "" : " (" + id + ")");
}

Slope slope_field(const json& obj, const char* field, const std::string& ctx) {
  const auto it = obj.find(field);
  if (it == obj.end()) throw InputError(ctx + ": missing field '" + field + "'");
  if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number_integer() || !(*it)[1].is_number_integer()) {
    throw InputError(ctx + ": field '" + field + "' must be [p, q] with integer entries");
  }
  try {
    return make_slope((*it)[0].get<std::int64_t>(), (*it)[1].get<std::int64_t>());
  } catch (const std::exception& e) {
    throw InputError(ctx + ": field '" + field + "': " + e.what());
  }
}

Instance parse_instance(const json& obj, std::size_t index) {
  Instance inst;
  if (!obj.is_object()) throw InputError(where(index, "") + ": expected an object");
  if (auto it = obj.find("id"); it != obj.end()) {
    if (!it->is_string()) throw InputError(where(index, "") + ": field 'id' must be a string");
    inst.id = it->get<std::string>();
  } else {
    inst.id = "instance-" + std::to_string(index);
  }
  const auto ctx = where(index, inst.id);
  if (auto it = obj.find("oracle"); it != obj.end() && !it->is_null()) {
    if (!it->is_number_integer() || it->get<std::int64_t>() < 0) {
      throw InputError(ctx + ": field 'oracle' must be a non-negative integer");
    }
    inst.oracle = it->get<int>();
  }
  if (auto it = obj.find("surface"); it != obj.end()) {
    if (*it != "T1") throw InputError(ctx + ": field 'surface': only \"T1\" slope pairs are supported");
    inst.torus = std::make_pair(slope_field(obj, "xi", ctx), slope_field(obj, "zeta", ctx));
    if (slope_det(inst.torus->first, inst.torus->second) == 0) throw InputError(ctx + ": xi and zeta coincide");
  } else {
    for (const char* f : {"n", "h", "v"}) {
      if (!obj.contains(f)) throw InputError(ctx + ": missing field '" + f + "'");
    }
    try {
      inst.n = obj.at("n").get<int>();
      inst.h = obj.at("h").get<Cycles>();
      inst.v = obj.at("v").get<Cycles>();
    } catch (const json::exception& e) {
      throw InputError(ctx + ": fields 'n', 'h', 'v' must be an integer and two lists of integer cycles");
    }
  }
  try {
    inst.build();
  } catch (const std::exception& e) {
    throw InputError(ctx + ": " + e.what());
  }
  return inst;
}

}  // namespace

std::vector<Instance> parse_manifest(const json& doc) {
  const json* list = &doc;
  json single;
  if (doc.is_object()) {
    if (auto it = doc.find("instances"); it != doc.end()) {
      list = &*it;
    } else {
      single = json::array({doc});
      list = &single;
    }
  }
  if (!list->is_array()) throw InputError("manifest: expected an instance, an array, or {\"instances\": [...]}");
  std::vector<Instance> out;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < list->size(); ++i) {
    out.push_back(parse_instance((*list)[i], i));
    if (!ids.insert(out.back().id).second) throw InputError(where(i, out.back().id) + ": duplicate id");
  }
  if (out.empty()) throw InputError("manifest: no instances");
  return out;
}

json parse_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string() + ": cannot open");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

std::vector<Instance> read_manifest(const std::filesystem::path& path) {
  const auto doc = parse_json_file(path);
  try {
    return parse_manifest(doc);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

std::vector<json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string() + ": cannot open");
  std::vector<json> out;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cache

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

std::string cache_key(const std::string& subcommand, const Instance& instance, const json& config) {
  json cfg = config;
  cfg.erase("seed");
  // nlohmann::json objects keep keys sorted, so dump() is canonical.
  const json doc = {{"command", subcommand}, {"instance", instance.canonical()}, {"config", cfg}};
  std::ostringstream hex;
  hex << std::hex << std::setw(16) << std::setfill('0') << fnv1a(doc.dump());
  return hex.str();
}

std::optional<json> Cache::get(const std::string& key, std::ostream& log) const {
  if (!dir_) return std::nullopt;
  const auto path = *dir_ / (key + ".json");
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    const auto doc = json::parse(in);
    if (doc.at("key") != key) throw std::runtime_error("key mismatch");
    return doc.at("value");
  } catch (const std::exception& e) {
    log << "warning: corrupt cache entry " << path.string() << " (" << e.what() << "); rebuilding\n";
    return std::nullopt;
  }
}

void Cache::put(const std::string& key, const json& value) const {
  if (!dir_) return;
  std::filesystem::create_directories(*dir_);
  const auto path = *dir_ / (key + ".json");
  const auto tmp = *dir_ / (key + ".json.tmp");
  {
    std::ofstream out(tmp);
    out << json{{"key", key}, {"value", value}}.dump() << '\n';
  }
  std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Records

json config_json(const RunConfig& config) {
  const auto c = config.estimator();
  json j = {{"delta", c.delta},   {"epsilon", c.epsilon},     {"step", c.step},
            {"margin", c.margin}, {"sc_bound", c.sc_bound},   {"budget", c.budget},
            {"max_depth", c.max_depth}, {"seed", config.seed}, {"window", nullptr}};
  if (config.window) j["window"] = {config.window->lo, config.window->hi};
  return j;
}

namespace {

json optional_int(const std::optional<int>& v) { return v ? json(*v) : json(nullptr); }

std::string format_number(double x) {
  std::ostringstream s;
  s << std::setprecision(15) << x;
  return s.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

json error_record(const std::string& id, const std::string& message) { return {{"id", id}, {"error", message}}; }

std::optional<int> oracle_of(const Instance& inst, const FlowTrace& trace, CurveDistance& distance) {
  if (auto d = distance.exact(trace.xi, trace.zeta)) return d;
  return inst.oracle;
}

}  // namespace

json report_json(const std::string& id, const EstimateReport& r) {
  return {{"id", id},
          {"n", r.n},
          {"kappa", r.kappa},
          {"theta", r.theta},
          {"lower", r.lower},
          {"upper", r.upper},
          {"oracle", optional_int(r.oracle)},
          {"oracle_lower", r.oracle_bounds.lower},
          {"oracle_upper", optional_int(r.oracle_bounds.upper)},
          {"achieved_delta_min", r.achieved_delta_min},
          {"window", {r.window.lo, r.window.hi}},
          {"step", r.step},
          {"flags", r.flags},
          {"breakpoints", r.breakpoints.times}};
}

// ---------------------------------------------------------------------------
// Subcommands

int run_estimate(const RunConfig& config, const std::vector<Instance>& manifest, Constants constants,
                 const Cache& cache, std::ostream& out, std::ostream& log) {
  const auto ecfg = config.estimator();
  if (!(constants.theta > 0) || !(constants.kappa >= 0)) throw InputError("theta must be positive and kappa non-negative");
  json cfg = config_json(config);
  cfg["theta"] = constants.theta;
  cfg["kappa"] = constants.kappa;
  const bool csv = config.mode == OutputMode::csv;
  if (csv) out << "id,n,kappa,theta,lower,upper,oracle,achieved_delta_min,window_lo,window_hi,step,flags\n";
  int status = 0;
  for (const auto& inst : manifest) {
    json rec;
    const auto key = cache_key("estimate", inst, cfg);
    if (auto hit = cache.get(key, log)) {
      log << "cache hit: " << inst.id << '\n';
      rec = *hit;
      rec["id"] = inst.id;
    } else {
      try {
        CurveDistance distance(ecfg.max_depth, ecfg.budget);
        auto r = estimate(inst.build(), constants.theta, constants.kappa, ecfg, distance, config.window);
        if (inst.oracle) {
          if (r.oracle && *r.oracle != *inst.oracle) {
            throw std::runtime_error("manifest oracle " + std::to_string(*inst.oracle) + " disagrees with computed " +
                                     std::to_string(*r.oracle));
          }
          if (!r.oracle) {
            r.oracle = inst.oracle;
            r.flags.push_back("oracle_from_manifest");
          }
        }
        rec = report_json(inst.id, r);
        cache.put(key, rec);
      } catch (const std::exception& e) {
        log << inst.id << ": " << e.what() << '\n';
        rec = error_record(inst.id, e.what());
        status = 1;
      }
    }
    if (!csv) {
      out << rec.dump() << '\n';
    } else if (rec.contains("error")) {
      out << csv_field(inst.id) << ",error,,,,,,,,,,\n";
    } else {
      const auto num = [&](const char* f) { return rec[f].is_null() ? std::string() : format_number(rec[f].get<double>()); };
      out << csv_field(inst.id) << ',' << rec["n"].get<int>() << ',' << num("kappa") << ',' << num("theta") << ','
          << num("lower") << ',' << num("upper") << ',' << num("oracle") << ',' << num("achieved_delta_min") << ','
          << format_number(rec["window"][0].get<double>()) << ',' << format_number(rec["window"][1].get<double>())
          << ',' << num("step") << ',' << csv_field(join(rec["flags"].get<std::vector<std::string>>(), ";")) << '\n';
    }
  }
  return status;
}

int run_calibrate(const RunConfig& config, const std::vector<Instance>& manifest, std::ostream& out,
                  std::ostream& log) {
  const auto ecfg = config.estimator();
  CurveDistance distance(ecfg.max_depth, ecfg.budget);
  std::vector<CalibrationInstance> corpus;
  json instances = json::array();
  int status = 0;
  for (const auto& inst : manifest) {
    try {
      const auto o = inst.build();
      auto trace = sample_window(o, config.window.value_or(default_window(*o, ecfg.margin)), ecfg);
      const int n = greedy_breakpoints(trace, distance).n();
      const auto oracle = oracle_of(inst, trace, distance);
      instances.push_back({{"id", inst.id}, {"n", n}, {"oracle", optional_int(oracle)}});
      corpus.push_back({inst.id, std::move(trace), n, oracle});
    } catch (const std::exception& e) {
      log << inst.id << ": " << e.what() << '\n';
      instances.push_back(error_record(inst.id, e.what()));
      status = 1;
    }
  }
  if (corpus.empty()) throw std::runtime_error("no instance could be calibrated");
  const auto kappa = calibrate_kappa(corpus, distance);
  json rec = {{"kappa", kappa.kappa},
              {"kappa_witness",
               {{"id", kappa.witness.id},
                {"s", kappa.witness.s},
                {"t", kappa.witness.t},
                {"u", kappa.witness.u},
                {"kind", kappa.witness.kind},
                {"defect", kappa.witness.defect}}},
              {"uncertified_pairs", kappa.uncertified_pairs},
              {"instances", instances},
              {"config", config_json(config)}};
  try {
    const auto theta = calibrate_theta(corpus);
    rec["theta"] = theta.theta;
    rec["theta_witness"] = theta.witness;
  } catch (const std::domain_error& e) {
    log << "theta: " << e.what() << '\n';
    rec["theta"] = nullptr;
    status = 1;
  }
  out << rec.dump() << '\n';
  return status;
}

int run_trace(const RunConfig& config, const std::vector<Instance>& manifest, std::ostream& out, std::ostream& log) {
  const auto ecfg = config.estimator();
  const bool csv = config.mode != OutputMode::json;
  if (csv && manifest.size() != 1) throw InputError("trace writes CSV for exactly one instance; select one with --id");
  int status = 0;
  if (csv) out << "t,upsilon_id,len_xi,len_zeta,systole,breakpoint\n";
  for (const auto& inst : manifest) {
    try {
      const auto o = inst.build();
      const auto trace = sample_window(o, config.window.value_or(default_window(*o, ecfg.margin)), ecfg);
      CurveDistance distance(ecfg.max_depth, ecfg.budget);
      const auto seq = greedy_breakpoints(trace, distance);
      const std::set<std::int64_t> marks(seq.indices.begin(), seq.indices.end());
      for (std::size_t i = 0; i < trace.samples.size(); ++i) {
        const auto& s = trace.samples[i];
        const bool bp = marks.count(static_cast<std::int64_t>(i)) > 0;
        if (csv) {
          out << format_number(s.t) << ',' << csv_field(s.upsilon.curve.key()) << ','
              << format_number(static_cast<double>(s.len_xi)) << ',' << format_number(static_cast<double>(s.len_zeta))
              << ',' << format_number(static_cast<double>(s.systole.value)) << ',' << (bp ? 1 : 0) << '\n';
        } else {
          out << json{{"id", inst.id},
                      {"t", s.t},
                      {"upsilon_id", s.upsilon.curve.key()},
                      {"len_xi", static_cast<double>(s.len_xi)},
                      {"len_zeta", static_cast<double>(s.len_zeta)},
                      {"systole", static_cast<double>(s.systole.value)},
                      {"breakpoint", bp}}
                     .dump()
              << '\n';
        }
      }
    } catch (const std::exception& e) {
      log << inst.id << ": " << e.what() << '\n';
      status = 1;
    }
  }
  return status;
}

int run_oracle(const RunConfig& config, const std::vector<Instance>& manifest, std::ostream& out, std::ostream& log) {
  const auto ecfg = config.estimator();
  int status = 0;
  for (const auto& inst : manifest) {
    try {
      const auto o = inst.build();
      const auto [xi, zeta] = core_curves(*o);
      CurveDistance distance(ecfg.max_depth, ecfg.budget);
      const auto b = distance.bound(xi, zeta);
      json rec = {{"id", inst.id},
                  {"lower", b.lower},
                  {"upper", optional_int(b.upper)},
                  {"exact", b.certified() ? json(b.lower) : json(nullptr)},
                  {"method", xi.surface().complexity() == 1 ? "farey" : "witness_search"}};
      if (inst.oracle && (*inst.oracle < b.lower || (b.upper && *inst.oracle > *b.upper))) {
        throw std::runtime_error("manifest oracle " + std::to_string(*inst.oracle) + " lies outside the computed bounds");
      }
      out << rec.dump() << '\n';
    } catch (const std::exception& e) {
      log << inst.id << ": " << e.what() << '\n';
      out << error_record(inst.id, e.what()).dump() << '\n';
      status = 1;
    }
  }
  return status;
}

namespace {

std::vector<std::string> check_report(const json& rec) {
  std::vector<std::string> errs;
  if (rec.contains("error")) return {"instance failed: " + rec["error"].get<std::string>()};
  for (const char* f : {"n", "kappa", "theta", "lower", "upper", "window", "step", "breakpoints"}) {
    if (!rec.contains(f)) errs.push_back(std::string("missing field '") + f + "'");
  }
  if (!errs.empty()) return errs;
  const auto times = rec["breakpoints"].get<std::vector<double>>();
  const int n = rec["n"].get<int>();
  if (times.empty() || n != static_cast<int>(times.size()) - 1) errs.push_back("n does not match the breakpoint count");
  const double theta = rec["theta"].get<double>(), kappa = rec["kappa"].get<double>();
  if (std::fabs(rec["lower"].get<double>() - lower_bound(n, theta)) > 1e-9) errs.push_back("lower bound does not match n and theta");
  if (std::fabs(rec["upper"].get<double>() - upper_bound(n, kappa)) > 1e-9) errs.push_back("upper bound does not match n and kappa");
  const Window w{rec["window"][0].get<double>(), rec["window"][1].get<double>()};
  for (auto& e : verify_breakpoint_times(times, rec["step"].get<double>(), w)) errs.push_back(std::move(e));
  return errs;
}

}  // namespace

int run_validate(const RunConfig& config, const std::vector<json>& reports,
                 const std::optional<std::vector<Instance>>& manifest, std::ostream& out, std::ostream& log) {
  std::map<std::string, const Instance*> by_id;
  if (manifest) {
    for (const auto& inst : *manifest) by_id[inst.id] = &inst;
  }
  int status = 0;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& rec = reports[i];
    const std::string id = rec.contains("id") && rec["id"].is_string() ? rec["id"].get<std::string>()
                                                                       : "record-" + std::to_string(i);
    std::vector<std::string> errs;
    try {
      errs = check_report(rec);
      if (errs.empty() && manifest) {
        const auto it = by_id.find(id);
        if (it == by_id.end()) {
          errs.push_back("no manifest instance with this id");
        } else {
          auto ecfg = config.estimator();
          ecfg.step = rec["step"].get<double>();
          const Window w{rec["window"][0].get<double>(), rec["window"][1].get<double>()};
          const auto trace = sample_window(it->second->build(), w, ecfg);
          BreakpointSequence seq;
          for (double t : rec["breakpoints"].get<std::vector<double>>()) {
            const auto k = static_cast<std::int64_t>(std::llround(t / ecfg.step)) - trace.samples.front().index;
            if (k < 0 || k >= static_cast<std::int64_t>(trace.samples.size())) {
              errs.push_back("breakpoint outside the sampled window");
              break;
            }
            seq.indices.push_back(k);
            seq.times.push_back(trace.samples[k].t);
          }
          if (errs.empty()) errs = verify_breakpoints(trace, seq);
        }
      }
    } catch (const std::exception& e) {
      errs.push_back(std::string("malformed report: ") + e.what());
    }
    if (errs.empty()) {
      out << id << ": ok\n";
    } else {
      status = 1;
      for (const auto& e : errs) {
        out << id << ": FAIL: " << e << '\n';
        log << id << ": " << e << '\n';
      }
    }
  }
  return status;
}

}  // namespace cgdist
