#pragma once

// Sampling the wide-curve map along the Teichmueller flow, the greedy
// breakpoint recursion, the two-sided distance estimate, and calibration of
// the constants kappa and theta against exact or certified distances.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cgdist/flat_surface.hpp"
#include "cgdist/wide_curve.hpp"

namespace cgdist {

struct EstimatorConfig {
  double delta = 0.1;
  double epsilon = 0.0025;  ///< thin-thick threshold; must stay below delta^2 / 2
  double step = 0.1;
  double margin = 2.0;
  double sc_bound = 2.0;
  int budget = 6;     ///< witness-search chord budget
  int max_depth = 4;  ///< witness-search path length

  /// Throws std::domain_error on violated invariants.
  void validate() const;
};

struct Window {
  double lo = 0;
  double hi = 0;
};

/// T+ = ln(n)/2 + margin, T- = -T+.
Window default_window(const Origami& origami, double margin);

struct FlowSample {
  double t = 0;
  std::int64_t index = 0;  ///< t = index * step
  WideCurveChoice upsilon;
  long double len_xi = 0;
  long double len_zeta = 0;
  SystoleEstimate systole;
  int short_curves = 0;
  int components = 0;
};

struct FlowTrace {
  std::shared_ptr<const Origami> origami;
  CurveClass xi;
  CurveClass zeta;
  Window window;
  double step = 0;
  std::vector<FlowSample> samples;
};

/// Samples at every multiple of `step` inside the window, so enlarging the
/// window or halving the step gives a superset grid. Sampling runs in
/// parallel; the result does not depend on the thread count.
FlowTrace sample_window(std::shared_ptr<const Origami> origami, Window window, const EstimatorConfig& config);

/// Curve-graph distances with a cache: Farey for the torus, the witness
/// search otherwise.
class CurveDistance {
 public:
  CurveDistance(int max_depth = 4, int budget = 6) : max_depth_(max_depth), budget_(budget) {}

  bool geq3(const CurveClass& a, const CurveClass& b);
  DistanceBound bound(const CurveClass& a, const CurveClass& b);
  /// Exact value when known.
  std::optional<int> exact(const CurveClass& a, const CurveClass& b);

 private:
  int max_depth_;
  int budget_;
  std::map<std::pair<std::string, std::string>, bool> far_;
  std::map<std::pair<std::string, std::string>, DistanceBound> bounds_;
};

struct BreakpointSequence {
  std::vector<std::int64_t> indices;  ///< positions in the trace
  std::vector<double> times;
  int n() const { return times.empty() ? 0 : static_cast<int>(times.size()) - 1; }
};

/// Gap in grid steps equivalent to one time unit.
std::int64_t unit_gap_steps(double step);

/// t_0 is the first grid time; t_{i+1} is the smallest grid time >= t_i + 1
/// with distance >= 3 between every sample at or before t_i and every sample
/// at or after t_{i+1}.
BreakpointSequence greedy_breakpoints(const FlowTrace& trace, CurveDistance& distance);

/// Independent re-check of a breakpoint sequence against its trace: gap
/// hypothesis, separation over all grid pairs, and greedy minimality. Returns
/// human-readable violations; empty means valid.
std::vector<std::string> verify_breakpoints(const FlowTrace& trace, const BreakpointSequence& seq);

/// Checks of a stored sequence without its trace: increasing times on the
/// grid, gap hypothesis, first time at the window start.
std::vector<std::string> verify_breakpoint_times(const std::vector<double>& times, double step, Window window);

struct EstimateReport {
  int n = 0;
  double kappa = 0;
  double theta = 0;
  double lower = 0;
  double upper = 0;
  std::optional<int> oracle;    ///< exact d(xi, zeta) when known
  DistanceBound oracle_bounds;  ///< always filled
  double achieved_delta_min = 0;
  Window window;
  double step = 0;
  BreakpointSequence breakpoints;
  std::vector<std::string> flags;
};

double lower_bound(int n, double theta);
double upper_bound(int n, double kappa);

EstimateReport estimate(std::shared_ptr<const Origami> origami, double theta, double kappa,
                        const EstimatorConfig& config, CurveDistance& distance,
                        std::optional<Window> window = std::nullopt);

/// Everything calibration needs from one instance.
struct CalibrationInstance {
  std::string id;
  FlowTrace trace;
  int n = 0;
  std::optional<int> oracle;
};

struct KappaWitness {
  std::string id;
  double s = 0, t = 0, u = 0;
  std::string kind;  ///< "lipschitz" or "triangle"
  double defect = 0;
};

struct KappaCalibration {
  double kappa = 0;
  KappaWitness witness;
  std::size_t uncertified_pairs = 0;  ///< pairs skipped for lack of an exact distance
};

/// Smallest kappa with d(s,t) <= kappa |t - s| + kappa and
/// d(s,t) + d(t,u) <= d(s,u) + kappa over all sampled s <= t <= u.
KappaCalibration calibrate_kappa(const std::vector<CalibrationInstance>& corpus, CurveDistance& distance);

struct ThetaCalibration {
  double theta = 0;
  std::string witness;
};

/// theta_min = (-d + sqrt(d^2 + 4n)) / 2 per instance; the corpus maximum.
double theta_min(int n, int d);
ThetaCalibration calibrate_theta(const std::vector<CalibrationInstance>& corpus);

struct ProgressionReport {
  double thick_fraction = 0;
  std::optional<int> endpoint_distance;
  bool claim = false;  ///< thick_fraction >= b
};

ProgressionReport progression_diagnostic(const FlowTrace& trace, double epsilon, double b, CurveDistance& distance);

struct TorusPair {
  std::string id;
  Slope xi;
  Slope zeta;
  int distance = 0;
};

/// Random slope pairs with Farey distance in [min_distance, max_distance] and
/// |det| <= max_det: a random continued fraction with small partial quotients
/// against 1/0, moved by a random integer unimodular map.
std::vector<TorusPair> random_torus_corpus(std::size_t count, std::uint64_t seed, int min_distance = 3,
                                           int max_distance = 15, std::int64_t max_det = 1'000'000'000);

}  // namespace cgdist
