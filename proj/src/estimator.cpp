#include "cgdist/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <random>
#include <thread>
#include <tuple>

#include "cgdist/farey.hpp"

namespace cgdist {

void EstimatorConfig::validate() const {
  if (!(delta > 0)) throw std::domain_error("delta must be positive");
  if (!(epsilon > 0)) throw std::domain_error("epsilon must be positive");
  if (!(epsilon < delta * delta / 2)) throw std::domain_error("epsilon must be below delta^2/2");
  if (!(step > 0)) throw std::domain_error("step must be positive");
  if (!(margin >= 0)) throw std::domain_error("margin must be non-negative");
  if (!(sc_bound > 0)) throw std::domain_error("sc-bound must be positive");
  if (budget <= 0) throw std::domain_error("budget must be positive");
  if (max_depth < 1) throw std::domain_error("max depth must be positive");
}

Window default_window(const Origami& origami, double margin) {
  if (!(margin >= 0)) throw std::domain_error("margin must be non-negative");
  const double t = 0.5 * std::log(static_cast<double>(origami.size())) + margin;
  return {-t, t};
}

namespace {

std::pair<std::int64_t, std::int64_t> grid_range(Window window, double step) {
  const auto lo = static_cast<std::int64_t>(std::ceil(window.lo / step - 1e-9));
  const auto hi = static_cast<std::int64_t>(std::floor(window.hi / step + 1e-9));
  return {lo, hi};
}

template <class Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const std::size_t threads = std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), count));
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += threads) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

FlowTrace sample_window(std::shared_ptr<const Origami> origami, Window window, const EstimatorConfig& config) {
  config.validate();
  if (!(window.lo <= window.hi)) throw std::domain_error("empty window");
  const auto [first, last] = grid_range(window, config.step);
  if (first > last) throw std::domain_error("window contains no grid time");

  FlowTrace trace;
  trace.origami = origami;
  std::tie(trace.xi, trace.zeta) = core_curves(*origami);
  trace.window = window;
  trace.step = config.step;
  trace.samples.resize(static_cast<std::size_t>(last - first + 1));
  const double eps0 = config.delta * config.delta / 2;
  parallel_for(trace.samples.size(), [&](std::size_t i) {
    auto& s = trace.samples[i];
    s.index = first + static_cast<std::int64_t>(i);
    s.t = static_cast<double>(s.index) * config.step;
    const FlowPoint pt{origami, s.t};
    s.upsilon = upsilon(pt, config.delta);
    s.len_xi = flat_length(trace.xi, pt).value(s.t);
    s.len_zeta = flat_length(trace.zeta, pt).value(s.t);
    s.systole = systole_estimate(pt);
    const auto tt = thin_thick(pt, config.epsilon, eps0, config.sc_bound);
    s.short_curves = static_cast<int>(tt.short_curves.size());
    s.components = static_cast<int>(tt.components.size());
  });
  return trace;
}

// ---------------------------------------------------------------------------
// Distances

namespace {

std::pair<std::string, std::string> pair_key(const CurveClass& a, const CurveClass& b) {
  return a.key() < b.key() ? std::make_pair(a.key(), b.key()) : std::make_pair(b.key(), a.key());
}

}  // namespace

bool CurveDistance::geq3(const CurveClass& a, const CurveClass& b) {
  if (a == b) return false;
  const auto key = pair_key(a, b);
  if (auto it = far_.find(key); it != far_.end()) return it->second;
  const bool far = distance_geq3(a, b);
  far_.emplace(key, far);
  return far;
}

DistanceBound CurveDistance::bound(const CurveClass& a, const CurveClass& b) {
  if (a == b) return {0, 0};
  const auto key = pair_key(a, b);
  if (auto it = bounds_.find(key); it != bounds_.end()) return it->second;
  DistanceBound out;
  if (a.surface().complexity() == 1) {
    const int d = farey_distance(*a.slope(), *b.slope());
    out = {d, d};
  } else {
    out = bounded_distance_search(a, b, max_depth_, budget_);
  }
  bounds_.emplace(key, out);
  return out;
}

std::optional<int> CurveDistance::exact(const CurveClass& a, const CurveClass& b) {
  const auto b_ = bound(a, b);
  if (b_.certified()) return b_.lower;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Breakpoints

std::int64_t unit_gap_steps(double step) {
  return static_cast<std::int64_t>(std::ceil(1.0 / step - 1e-9));
}

BreakpointSequence greedy_breakpoints(const FlowTrace& trace, CurveDistance& distance) {
  const auto count = static_cast<std::int64_t>(trace.samples.size());
  if (count == 0) throw std::domain_error("greedy_breakpoints: empty trace");

  // Distinct curves and their pairwise separation.
  std::vector<int> id(static_cast<std::size_t>(count));
  std::vector<const CurveClass*> curves;
  std::map<std::string, int> by_key;
  for (std::int64_t i = 0; i < count; ++i) {
    const auto& c = trace.samples[i].upsilon.curve;
    auto [it, inserted] = by_key.emplace(c.key(), static_cast<int>(curves.size()));
    if (inserted) curves.push_back(&c);
    id[i] = it->second;
  }
  std::map<std::pair<int, int>, bool> far;
  const auto is_far = [&](int x, int y) {
    if (x == y) return false;
    const auto key = std::minmax(x, y);
    if (auto it = far.find(key); it != far.end()) return it->second;
    const bool f = distance.geq3(*curves[x], *curves[y]);
    far.emplace(key, f);
    return f;
  };

  const std::int64_t gap = unit_gap_steps(trace.step);
  BreakpointSequence seq;
  std::set<int> prefix;
  std::int64_t current = 0, scanned = -1;
  while (true) {
    seq.indices.push_back(current);
    seq.times.push_back(trace.samples[current].t);
    for (std::int64_t s = scanned + 1; s <= current; ++s) prefix.insert(id[s]);
    scanned = current;
    // The condition is monotone in the candidate: find the last sample that
    // is not separated from the prefix.
    std::int64_t last_bad = current;
    for (std::int64_t t = count - 1; t > current; --t) {
      bool separated = true;
      for (int s : prefix) {
        if (!is_far(s, id[t])) {
          separated = false;
          break;
        }
      }
      if (!separated) {
        last_bad = t;
        break;
      }
    }
    const std::int64_t next = std::max(current + gap, last_bad + 1);
    if (next >= count) break;
    current = next;
  }
  return seq;
}

std::vector<std::string> verify_breakpoint_times(const std::vector<double>& times, double step, Window window) {
  std::vector<std::string> out;
  if (times.empty()) {
    out.push_back("empty breakpoint sequence");
    return out;
  }
  const auto [first, last] = grid_range(window, step);
  const double start = static_cast<double>(first) * step;
  if (std::fabs(times.front() - start) > 1e-9) {
    std::ostringstream msg;
    msg << "first breakpoint " << times.front() << " is not the window start " << start;
    out.push_back(msg.str());
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double k = times[i] / step;
    if (std::fabs(k - std::round(k)) > 1e-6 || std::round(k) < static_cast<double>(first) ||
        std::round(k) > static_cast<double>(last)) {
      std::ostringstream msg;
      msg << "breakpoint t" << i << " = " << times[i] << " is not a grid time";
      out.push_back(msg.str());
    }
    if (i + 1 < times.size() && times[i + 1] - times[i] < 1 - 1e-9) {
      std::ostringstream msg;
      msg << "unit-gap hypothesis violated: t" << i + 1 << " - t" << i << " = " << times[i + 1] - times[i] << " < 1";
      out.push_back(msg.str());
    }
  }
  return out;
}

std::vector<std::string> verify_breakpoints(const FlowTrace& trace, const BreakpointSequence& seq) {
  auto out = verify_breakpoint_times(seq.times, trace.step, trace.window);
  const auto count = static_cast<std::int64_t>(trace.samples.size());
  if (seq.indices.size() != seq.times.size()) {
    out.push_back("indices and times differ in length");
    return out;
  }
  for (std::size_t i = 0; i < seq.indices.size(); ++i) {
    const auto k = seq.indices[i];
    if (k < 0 || k >= count || (i > 0 && k <= seq.indices[i - 1])) {
      out.push_back("breakpoint indices are not increasing positions in the trace");
      return out;
    }
    if (trace.samples[k].t != seq.times[i]) out.push_back("breakpoint time does not match its sample");
  }
  if (seq.indices.front() != 0) out.push_back("first breakpoint is not the first sample");

  // Separation predicate recomputed from scratch, memoized by curve keys.
  std::map<std::pair<std::string, std::string>, bool> memo;
  const auto far = [&](const CurveClass& a, const CurveClass& b) {
    if (a.key() == b.key()) return false;
    const auto key = pair_key(a, b);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const bool f = distance_geq3(a, b);
    memo.emplace(key, f);
    return f;
  };
  // separated(a, j): every sample <= a is at distance >= 3 from every sample >= j.
  const auto separated = [&](std::int64_t a, std::int64_t j) {
    std::map<std::string, const CurveClass*> before, after;
    for (std::int64_t s = 0; s <= a; ++s) before.emplace(trace.samples[s].upsilon.curve.key(), &trace.samples[s].upsilon.curve);
    for (std::int64_t t = j; t < count; ++t) after.emplace(trace.samples[t].upsilon.curve.key(), &trace.samples[t].upsilon.curve);
    for (const auto& [k1, x] : before) {
      for (const auto& [k2, y] : after) {
        if (!far(*x, *y)) return false;
      }
    }
    return true;
  };
  const auto earliest = [&](std::int64_t a) {
    std::int64_t j = a + 1;
    while (j < count && trace.samples[j].t - trace.samples[a].t < 1 - 1e-9) ++j;
    return j;
  };
  for (std::size_t i = 0; i + 1 < seq.indices.size(); ++i) {
    const auto a = seq.indices[i], b = seq.indices[i + 1];
    if (!separated(a, b)) {
      std::ostringstream msg;
      msg << "separation hypothesis violated between t" << i << " = " << seq.times[i] << " and t" << i + 1 << " = "
          << seq.times[i + 1];
      out.push_back(msg.str());
    }
    for (std::int64_t j = earliest(a); j < b; ++j) {
      if (separated(a, j)) {
        std::ostringstream msg;
        msg << "greedy choice not minimal after t" << i << ": t = " << trace.samples[j].t << " already qualifies";
        out.push_back(msg.str());
        break;
      }
    }
  }
  const auto a = seq.indices.back();
  for (std::int64_t j = earliest(a); j < count; ++j) {
    if (separated(a, j)) {
      out.push_back("sequence stops early: t = " + std::to_string(trace.samples[j].t) + " qualifies");
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Estimate

double lower_bound(int n, double theta) { return std::max(0.0, n / theta - theta); }
double upper_bound(int n, double kappa) { return n * (3 + 2 * kappa) + 3; }

EstimateReport estimate(std::shared_ptr<const Origami> origami, double theta, double kappa,
                        const EstimatorConfig& config, CurveDistance& distance, std::optional<Window> window) {
  if (!(theta > 0)) throw std::domain_error("theta must be positive");
  if (!(kappa >= 0)) throw std::domain_error("kappa must be non-negative");
  const Window win = window.value_or(default_window(*origami, config.margin));
  const auto trace = sample_window(origami, win, config);

  EstimateReport r;
  r.breakpoints = greedy_breakpoints(trace, distance);
  r.n = r.breakpoints.n();
  r.kappa = kappa;
  r.theta = theta;
  r.lower = lower_bound(r.n, theta);
  r.upper = upper_bound(r.n, kappa);
  r.window = win;
  r.step = config.step;
  r.oracle_bounds = distance.bound(trace.xi, trace.zeta);
  if (r.oracle_bounds.certified()) r.oracle = r.oracle_bounds.lower;

  r.achieved_delta_min = std::numeric_limits<double>::infinity();
  bool below = false;
  for (const auto& s : trace.samples) {
    r.achieved_delta_min = std::min(r.achieved_delta_min, static_cast<double>(s.upsilon.achieved_delta));
    below = below || s.upsilon.below_target;
  }
  r.flags.push_back("separation_checked_on_grid");
  if (below) r.flags.push_back("below_target_delta");
  if (r.oracle_bounds.upper && *r.oracle_bounds.upper <= 2) r.flags.push_back("outside_theorem_hypotheses");
  if (!r.oracle_bounds.certified()) r.flags.push_back("oracle_interval");
  if (trace.samples.front().upsilon.curve != trace.xi || trace.samples.back().upsilon.curve != trace.zeta) {
    r.flags.push_back("window_endpoints_not_cores");
  }
  return r;
}

// ---------------------------------------------------------------------------
// Calibration

namespace {

struct Run {
  const CurveClass* curve;
  double start;
  double end;
};

std::vector<Run> runs_of(const FlowTrace& trace) {
  std::vector<Run> runs;
  for (const auto& s : trace.samples) {
    if (!runs.empty() && *runs.back().curve == s.upsilon.curve) {
      runs.back().end = s.t;
    } else {
      runs.push_back({&s.upsilon.curve, s.t, s.t});
    }
  }
  return runs;
}

}  // namespace

KappaCalibration calibrate_kappa(const std::vector<CalibrationInstance>& corpus, CurveDistance& distance) {
  if (corpus.empty()) throw std::domain_error("calibrate_kappa: empty corpus");
  KappaCalibration out;
  out.witness.defect = 0;
  for (const auto& inst : corpus) {
    const auto runs = runs_of(inst.trace);
    const std::size_t r = runs.size();
    std::vector<std::optional<int>> d(r * r);
    for (std::size_t i = 0; i < r; ++i) {
      d[i * r + i] = 0;
      for (std::size_t j = i + 1; j < r; ++j) {
        d[i * r + j] = d[j * r + i] = distance.exact(*runs[i].curve, *runs[j].curve);
        if (!d[i * r + j]) ++out.uncertified_pairs;
      }
    }
    const auto consider = [&](double defect, double s, double t, double u, const char* kind) {
      if (defect > out.witness.defect) out.witness = {inst.id, s, t, u, kind, defect};
    };
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = i + 1; j < r; ++j) {
        if (!d[i * r + j]) continue;
        // Closest sampled times of the two runs.
        const double gap = runs[j].start - runs[i].end;
        consider(*d[i * r + j] / (1 + gap), runs[i].end, runs[j].start, runs[j].start, "lipschitz");
      }
    }
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = i; j < r; ++j) {
        for (std::size_t k = j; k < r; ++k) {
          const auto& st = d[i * r + j];
          const auto& tu = d[j * r + k];
          const auto& su = d[i * r + k];
          if (!st || !tu || !su) continue;
          consider(*st + *tu - *su, runs[i].end, runs[j].start, runs[k].start, "triangle");
        }
      }
    }
  }
  out.kappa = out.witness.defect;
  return out;
}

double theta_min(int n, int d) {
  if (n < 0 || d < 0) throw std::domain_error("theta_min: negative input");
  const double dd = d;
  return (-dd + std::sqrt(dd * dd + 4.0 * n)) / 2;
}

ThetaCalibration calibrate_theta(const std::vector<CalibrationInstance>& corpus) {
  ThetaCalibration out;
  bool any = false;
  for (const auto& inst : corpus) {
    if (!inst.oracle) continue;
    const double th = theta_min(inst.n, *inst.oracle);
    if (!any || th > out.theta) out = {th, inst.id};
    any = true;
  }
  if (!any) throw std::domain_error("calibrate_theta: no instance with an oracle distance");
  return out;
}

ProgressionReport progression_diagnostic(const FlowTrace& trace, double epsilon, double b, CurveDistance& distance) {
  if (!(epsilon > 0)) throw std::domain_error("progression_diagnostic: epsilon must be positive");
  if (!(b > 0 && b < 1)) throw std::domain_error("progression_diagnostic: b must lie in (0,1)");
  if (trace.samples.empty()) throw std::domain_error("progression_diagnostic: empty trace");
  std::size_t thick = 0;
  for (const auto& s : trace.samples) thick += s.systole.value >= epsilon ? 1 : 0;
  ProgressionReport out;
  out.thick_fraction = static_cast<double>(thick) / static_cast<double>(trace.samples.size());
  out.endpoint_distance = distance.exact(trace.samples.front().upsilon.curve, trace.samples.back().upsilon.curve);
  out.claim = out.thick_fraction >= b;
  return out;
}

// ---------------------------------------------------------------------------
// Random corpus

std::vector<TorusPair> random_torus_corpus(std::size_t count, std::uint64_t seed, int min_distance, int max_distance,
                                           std::int64_t max_det) {
  std::mt19937_64 rng(seed);
  const auto draw = [&](std::uint64_t m) { return static_cast<std::int64_t>(rng() % m); };
  constexpr __int128 entry_limit = static_cast<__int128>(1) << 40;
  std::vector<TorusPair> out;
  std::set<std::tuple<std::int64_t, std::int64_t, std::int64_t, std::int64_t>> seen;
  for (std::size_t attempt = 0; out.size() < count; ++attempt) {
    if (attempt > 1'000'000 + 1000 * count) throw std::runtime_error("random_torus_corpus: acceptance rate too low");
    // p/q = [0; a1, ..., aL] with small partial quotients.
    const int length = 2 + static_cast<int>(draw(20));
    __int128 h_prev = 1, h = 0, k_prev = 0, k = 1;  // convergents of [0;]
    bool ok = true;
    for (int i = 0; i < length && ok; ++i) {
      const __int128 a = 1 + draw(4);
      const __int128 hn = a * h + h_prev, kn = a * k + k_prev;
      h_prev = h;
      k_prev = k;
      h = hn;
      k = kn;
      ok = k <= max_det;
    }
    if (!ok) continue;
    // Random unimodular map as a short word in T^j and S.
    __int128 g[2][2] = {{1, 0}, {0, 1}};
    const int word = 1 + static_cast<int>(draw(3));
    for (int i = 0; i < word; ++i) {
      __int128 m[2][2];
      if (draw(2) == 0) {
        const __int128 j = (1 + draw(3)) * (draw(2) == 0 ? 1 : -1);
        m[0][0] = 1, m[0][1] = j, m[1][0] = 0, m[1][1] = 1;
      } else {
        m[0][0] = 0, m[0][1] = -1, m[1][0] = 1, m[1][1] = 0;
      }
      const __int128 r00 = m[0][0] * g[0][0] + m[0][1] * g[1][0], r01 = m[0][0] * g[0][1] + m[0][1] * g[1][1];
      const __int128 r10 = m[1][0] * g[0][0] + m[1][1] * g[1][0], r11 = m[1][0] * g[0][1] + m[1][1] * g[1][1];
      g[0][0] = r00, g[0][1] = r01, g[1][0] = r10, g[1][1] = r11;
    }
    const __int128 xp = g[0][0], xq = g[1][0];  // image of 1/0
    const __int128 zp = g[0][0] * h + g[0][1] * k, zq = g[1][0] * h + g[1][1] * k;
    const auto small = [&](__int128 v) { return v < entry_limit && -v < entry_limit; };
    if (!small(zp) || !small(zq)) continue;
    const Slope xi = make_slope(static_cast<std::int64_t>(xp), static_cast<std::int64_t>(xq));
    const Slope zeta = make_slope(static_cast<std::int64_t>(zp), static_cast<std::int64_t>(zq));
    const int d = farey_distance(xi, zeta);
    if (d < min_distance || d > max_distance) continue;
    if (!seen.insert({xi.p, xi.q, zeta.p, zeta.q}).second) continue;
    out.push_back({"torus-" + std::to_string(seed) + "-" + std::to_string(out.size()), xi, zeta, d});
  }
  return out;
}

}  // namespace cgdist
