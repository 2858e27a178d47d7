#include "doctest.h"

#include <cmath>
#include <map>
#include <numeric>

#include "cgdist/estimator.hpp"
#include "cgdist/farey.hpp"

using namespace cgdist;

namespace {

std::shared_ptr<const Origami> unit() { return std::make_shared<const Origami>(build_origami(1, {{1}}, {{1}})); }
std::shared_ptr<const Origami> torus(Slope xi, Slope zeta) {
  return std::make_shared<const Origami>(torus_pair_origami(xi, zeta));
}

// Greedy recursion straight from its definition, on Farey distances.
std::vector<double> brute_breakpoints(const FlowTrace& trace) {
  const auto& s = trace.samples;
  const auto far = [&](std::size_t a, std::size_t b) {
    return farey_distance(*s[a].upsilon.curve.slope(), *s[b].upsilon.curve.slope()) >= 3;
  };
  std::vector<double> out{s.front().t};
  std::size_t i = 0;
  while (true) {
    std::size_t found = s.size();
    for (std::size_t j = i + 1; j < s.size() && found == s.size(); ++j) {
      if (s[j].t - s[i].t < 1 - 1e-9) continue;
      bool ok = true;
      for (std::size_t a = 0; a <= i && ok; ++a) {
        for (std::size_t b = j; b < s.size() && ok; ++b) ok = far(a, b);
      }
      if (ok) found = j;
    }
    if (found == s.size()) return out;
    out.push_back(s[found].t);
    i = found;
  }
}

}  // namespace

TEST_CASE("configuration and window") {
  EstimatorConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.epsilon = cfg.delta * cfg.delta;
  CHECK_THROWS_AS(cfg.validate(), std::domain_error);
  cfg = EstimatorConfig{};
  cfg.step = 0;
  CHECK_THROWS_AS(cfg.validate(), std::domain_error);

  const auto w1 = default_window(*unit(), 2);
  CHECK(w1.lo == doctest::Approx(-2));
  CHECK(w1.hi == doctest::Approx(2));
  std::vector<int> cycle(25);
  std::iota(cycle.begin(), cycle.end(), 1);
  const auto big = build_origami(25, {cycle}, {cycle});
  CHECK(default_window(big, 2).hi == doctest::Approx(0.5 * std::log(25.0) + 2));
  CHECK(default_window(big, 2).hi == doctest::Approx(3.609).epsilon(1e-3));
  CHECK_THROWS_AS(default_window(big, -1), std::domain_error);
}

TEST_CASE("sampling") {
  EstimatorConfig cfg;
  cfg.step = 1;
  const auto trace = sample_window(unit(), {-2, 2}, cfg);
  REQUIRE(trace.samples.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    const double t = -2.0 + static_cast<double>(i);
    CHECK(trace.samples[i].t == doctest::Approx(t));
    CHECK(static_cast<double>(trace.samples[i].len_xi) == doctest::Approx(std::exp(t)));
    CHECK(static_cast<double>(trace.samples[i].len_zeta) == doctest::Approx(std::exp(-t)));
  }
  CHECK_THROWS_AS(sample_window(unit(), {0.2, 0.8}, cfg), std::domain_error);

  // Enlarged window and halved step give a superset grid with identical samples.
  cfg.step = 0.5;
  const auto coarse = sample_window(torus({0, 1}, {5, 8}), {-1, 1}, cfg);
  cfg.step = 0.25;
  const auto fine = sample_window(torus({0, 1}, {5, 8}), {-2, 2}, cfg);
  for (const auto& c : coarse.samples) {
    bool found = false;
    for (const auto& f : fine.samples) {
      if (std::fabs(f.t - c.t) < 1e-12) {
        found = true;
        CHECK(f.upsilon.curve == c.upsilon.curve);
      }
    }
    CHECK(found);
  }
}

TEST_CASE("greedy breakpoints") {
  EstimatorConfig cfg;
  CurveDistance dist;
  SUBCASE("constant wide curve gives n = 0") {
    auto trace = sample_window(torus({0, 1}, {5, 8}), {-2, 2}, cfg);
    for (auto& s : trace.samples) s.upsilon = trace.samples.front().upsilon;
    const auto seq = greedy_breakpoints(trace, dist);
    CHECK(seq.n() == 0);
    CHECK(verify_breakpoints(trace, seq).empty());
  }
  SUBCASE("torus pair 0/1, 5/8") {
    const auto r = estimate(torus({0, 1}, {5, 8}), 1.0, 0.0, cfg, dist);
    CHECK(r.oracle == 3);
    CHECK(r.n >= 1);
    CHECK(r.upper >= 3);
  }
  SUBCASE("agrees with the definition on random pairs") {
    cfg.step = 0.25;
    for (const auto& p : random_torus_corpus(12, 7, 3, 8, 100000)) {
      const auto o = torus(p.xi, p.zeta);
      const auto trace = sample_window(o, default_window(*o, 1), cfg);
      const auto seq = greedy_breakpoints(trace, dist);
      const auto brute = brute_breakpoints(trace);
      REQUIRE(seq.times.size() == brute.size());
      for (std::size_t i = 0; i < brute.size(); ++i) CHECK(seq.times[i] == doctest::Approx(brute[i]));
      CHECK(verify_breakpoints(trace, seq).empty());
    }
  }
}

TEST_CASE("verifier catches tampering") {
  EstimatorConfig cfg;
  CurveDistance dist;
  const auto o = torus({0, 1}, {70, 169});
  const auto trace = sample_window(o, default_window(*o, 2), cfg);
  auto seq = greedy_breakpoints(trace, dist);
  REQUIRE(seq.n() >= 2);
  CHECK(verify_breakpoints(trace, seq).empty());

  auto close = seq;
  close.times[1] = close.times[0] + 0.5;
  close.indices[1] = close.indices[0] + 5;
  const auto errs = verify_breakpoint_times(close.times, trace.step, trace.window);
  REQUIRE(!errs.empty());
  CHECK(errs.front().find("unit-gap") != std::string::npos);

  auto shortened = seq;
  shortened.indices.pop_back();
  shortened.times.pop_back();
  CHECK(!verify_breakpoints(trace, shortened).empty());

  auto late = seq;
  late.indices[1] += 1;
  late.times[1] = trace.samples[late.indices[1]].t;
  CHECK(!verify_breakpoints(trace, late).empty());
}

TEST_CASE("estimate bounds") {
  CHECK(theta_min(4, 1) == doctest::Approx(1.5616).epsilon(1e-4));
  CHECK(theta_min(0, 5) == 0);
  CHECK(upper_bound(0, 0) == 3);
  CHECK(lower_bound(0, 1) == 0);
  CHECK(lower_bound(9, 1) == 8);
  // theta_min is the smallest theta bracketing d from below.
  for (int n = 0; n < 20; ++n) {
    for (int d = 0; d < 20; ++d) {
      const double th = theta_min(n, d);
      if (th > 0) CHECK(lower_bound(n, th) == doctest::Approx(d));
      CHECK(lower_bound(n, th + 1e-6) <= d);
    }
  }

  EstimatorConfig cfg;
  CurveDistance dist;
  const auto r = estimate(torus({0, 1}, {2, 5}), 1.0, 0.0, cfg, dist);
  CHECK(r.oracle == 2);
  CHECK(std::find(r.flags.begin(), r.flags.end(), "outside_theorem_hypotheses") != r.flags.end());
  CHECK_THROWS_AS(estimate(unit(), 0.0, 0.0, cfg, dist), std::domain_error);
}

TEST_CASE("calibration") {
  EstimatorConfig cfg;
  CurveDistance dist;
  std::vector<CalibrationInstance> corpus;
  for (const auto& p : random_torus_corpus(15, 3, 3, 10, 1'000'000)) {
    const auto o = torus(p.xi, p.zeta);
    auto trace = sample_window(o, default_window(*o, cfg.margin), cfg);
    const int n = greedy_breakpoints(trace, dist).n();
    corpus.push_back({p.id, std::move(trace), n, p.distance});
  }
  const auto kappa = calibrate_kappa(corpus, dist);
  CHECK(kappa.uncertified_pairs == 0);
  CHECK(kappa.kappa >= 0);
  // Both inequalities hold with the calibrated constant over all sample triples.
  for (const auto& inst : corpus) {
    const auto& s = inst.trace.samples;
    const auto d = [&](std::size_t a, std::size_t b) {
      return farey_distance(*s[a].upsilon.curve.slope(), *s[b].upsilon.curve.slope());
    };
    for (std::size_t a = 0; a < s.size(); a += 3) {
      for (std::size_t b = a; b < s.size(); b += 2) {
        CHECK(d(a, b) <= kappa.kappa * (s[b].t - s[a].t) + kappa.kappa + 1e-9);
        for (std::size_t c = b; c < s.size(); c += 5) CHECK(d(a, b) + d(b, c) <= d(a, c) + kappa.kappa + 1e-9);
      }
    }
  }
  const auto theta = calibrate_theta(corpus);
  for (const auto& inst : corpus) {
    CHECK(lower_bound(inst.n, theta.theta) <= *inst.oracle + 1e-9);
    CHECK(upper_bound(inst.n, kappa.kappa) >= *inst.oracle);
  }
  CHECK_THROWS_AS(calibrate_kappa({}, dist), std::domain_error);
  CHECK_THROWS_AS(calibrate_theta({}), std::domain_error);
}

TEST_CASE("progression diagnostic is monotone") {
  EstimatorConfig cfg;
  CurveDistance dist;
  const auto o = torus({0, 1}, {13, 21});
  const auto trace = sample_window(o, default_window(*o, 2), cfg);
  double prev = 2;
  for (double eps : {0.01, 0.1, 0.3, 0.6, 0.9, 1.2}) {
    const auto r = progression_diagnostic(trace, eps, 0.5, dist);
    CHECK(r.thick_fraction <= prev);
    prev = r.thick_fraction;
    bool prev_claim = true;
    for (double b : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      const bool claim = progression_diagnostic(trace, eps, b, dist).claim;
      CHECK((prev_claim || !claim));
      prev_claim = claim;
    }
  }
  CHECK_THROWS_AS(progression_diagnostic(trace, 0.1, 1.5, dist), std::domain_error);
}

TEST_CASE("random torus corpus") {
  const auto a = random_torus_corpus(40, 11);
  const auto b = random_torus_corpus(40, 11);
  REQUIRE(a.size() == 40);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].xi == b[i].xi);
    CHECK(a[i].zeta == b[i].zeta);
    CHECK(a[i].distance == farey_distance(a[i].xi, a[i].zeta));
    CHECK(a[i].distance >= 3);
    CHECK(a[i].distance <= 15);
    CHECK(slope_det(a[i].xi, a[i].zeta) <= 1'000'000'000);
  }
}

TEST_CASE("time reversal") {
  // Reversing the flow swaps the roles of xi and zeta; report how n behaves.
  EstimatorConfig cfg;
  CurveDistance dist;
  int equal = 0, total = 0;
  for (const auto& p : random_torus_corpus(10, 5, 3, 8, 100000)) {
    const int n1 = estimate(torus(p.xi, p.zeta), 1, 0, cfg, dist).n;
    const int n2 = estimate(torus(p.zeta, p.xi), 1, 0, cfg, dist).n;
    CHECK(std::abs(n1 - n2) <= 1);
    equal += n1 == n2;
    ++total;
  }
  MESSAGE("time reversal preserved n on " << equal << "/" << total << " pairs");
}
