#include <doctest.h>

#include <cmath>
#include <sstream>

#include "dcflow/dc_core.hpp"
#include "dcflow/toy.hpp"

using namespace dcflow;
using toy::ToyProblem;

TEST_CASE("accel mode names round trip") {
  for (AccelMode m : {AccelMode::none, AccelMode::nesterov, AccelMode::heavy_ball}) {
    CHECK(parse_accel_mode(to_string(m)) == m);
  }
  CHECK_THROWS(parse_accel_mode("fista"));
}

TEST_CASE("adaptive rule threshold") {
  CHECK(adaptive_accept(1.0, 16.0, 16.0, 1.0));
  CHECK_FALSE(adaptive_accept(1.0 + 1e-12, 16.0, 16.0, 1.0));
  CHECK(adaptive_accept(0.0, 1.0, 0.0, 0.0));
}

TEST_CASE("exact DCA on the toy problem follows alpha^k e") {
  ToyProblem p(0.5);
  const IterationTrace tr = run_iadca(p, p.e(), {}, {0.0, 30});
  REQUIRE(tr.records.size() == 30);
  CHECK(tr.reason == StopReason::max_iterations);
  for (std::size_t k = 0; k < tr.iterates.size(); ++k) {
    for (double x : tr.iterates[k]) CHECK(x == doctest::Approx(std::pow(0.5, k)).epsilon(1e-13));
  }
  CHECK(verify_descent(tr).empty());
  CHECK(verify_adaptive(tr).empty());
  for (const IterationRecord& r : tr.records) {
    CHECK(r.restarts == 0);
    CHECK(r.eps == 1.0);
  }
}

TEST_CASE("relative-change stop") {
  ToyProblem p(0.5);
  const IterationTrace tr = run_iadca(p, p.e(), {}, {1e-3, 100});
  CHECK(tr.reason == StopReason::relative_change);
  // ||u^{k+1} - u^k|| / max(||u^k||, 1) = 0.5^{k+1}
  CHECK(tr.records.size() == 10);
}

TEST_CASE("noisy subsolves shrink eps and keep the invariants") {
  ToyProblem p(0.5, 64, 1e-2);
  const IterationTrace tr = run_iadca(p, p.e(), {}, {0.0, 40});
  CHECK(verify_descent(tr).empty());
  CHECK(verify_adaptive(tr).empty());
  bool restarted = false;
  for (const IterationRecord& r : tr.records) restarted = restarted || r.restarts > 0;
  CHECK(restarted);
  for (std::size_t k = 1; k < tr.records.size(); ++k) {
    CHECK(tr.records[k].eps <= tr.records[k - 1].eps);
  }
}

TEST_CASE("eps floor terminates a run near the critical point") {
  ToyProblem p(0.5, 64, 1.0);
  const IterationTrace tr = run_iadca(p, p.e(), {}, {0.0, 200});
  CHECK(tr.reason == StopReason::eps_floor);
  CHECK(verify_adaptive(tr).empty());
}

TEST_CASE("adaptive loop gives up with CriticalPointError") {
  ToyProblem p(0.5, 64, 1e-2);
  IadcaOptions o;
  o.gamma = 0.99;
  CHECK_THROWS_AS(run_iadca(p, 1e-3 * p.e(), {}, {0.0, 5}, o), CriticalPointError);
}

TEST_CASE("verify_descent and verify_adaptive flag corrupted traces") {
  ToyProblem p(0.5);
  IterationTrace tr = run_iadca(p, p.e(), {}, {0.0, 5});
  REQUIRE(verify_descent(tr).empty());

  IterationTrace up = tr;
  up.records[2].f = up.records[2].f_prev + 1e-3;  // ascent
  CHECK(verify_descent(up) == std::vector<int>{2});

  IterationTrace tight = tr;
  tight.records[1].step_norm *= 10.0;  // claims more progress than achieved
  CHECK(verify_descent(tight) == std::vector<int>{1});

  IterationTrace loose = tr;
  loose.records[3].eps_effective = 1.0;
  CHECK(verify_adaptive(loose) == std::vector<int>{3});

  IterationTrace grow = tr;
  grow.records[1].eps = 0.5;
  CHECK(verify_adaptive(grow) == std::vector<int>{2});
}

TEST_CASE("select_w") {
  ToyProblem p(0.5);
  const auto f = [&p](const Vector& x) { return p.objective(x); };
  const Vector u = 0.5 * p.e();

  AccelerationState none;
  bool acc = true;
  CHECK(select_w(u, none, f, p.objective(u), &acc) == u);
  CHECK_FALSE(acc);

  AccelerationState nes;
  nes.mode = AccelMode::nesterov;
  CHECK(select_w(u, nes, f, p.objective(u), &acc) == u);  // no previous iterate
  CHECK(nes.t == doctest::Approx(0.5 * (1 + std::sqrt(5.0))));
  nes.previous = p.e();
  // extrapolation 0.5 e + beta (0.5 e - e) moves toward 0 and lowers f
  const Vector w = select_w(u, nes, f, p.objective(u), &acc);
  CHECK(acc);
  CHECK(p.objective(w) < p.objective(u));

  AccelerationState hb;
  hb.mode = AccelMode::heavy_ball;
  hb.momentum = 5.0;
  hb.previous = p.e();
  // overshoots to -2 e, f rises, guard falls back to u
  CHECK(select_w(u, hb, f, p.objective(u), &acc) == u);
  CHECK_FALSE(acc);
}

TEST_CASE("accelerated runs keep the invariants") {
  for (AccelMode m : {AccelMode::nesterov, AccelMode::heavy_ball}) {
    ToyProblem p(0.9, 64, 1e-4);
    AccelerationState a;
    a.mode = m;
    const IterationTrace tr = run_iadca(p, p.e(), a, {1e-8, 60});
    CHECK(verify_descent(tr).empty());
    CHECK(verify_adaptive(tr).empty());
    CHECK(tr.final_objective() < tr.f0);
  }
}

TEST_CASE("runs are deterministic") {
  ToyProblem p1(0.7, 32, 1e-3), p2(0.7, 32, 1e-3);
  AccelerationState a;
  a.mode = AccelMode::nesterov;
  const IterationTrace t1 = run_iadca(p1, p1.e(), a, {0.0, 25});
  const IterationTrace t2 = run_iadca(p2, p2.e(), a, {0.0, 25});
  REQUIRE(t1.iterates.size() == t2.iterates.size());
  for (std::size_t k = 0; k < t1.iterates.size(); ++k) CHECK(t1.iterates[k] == t2.iterates[k]);
  std::ostringstream s1, s2;
  write_trace_csv(t1, s1);
  write_trace_csv(t2, s2);
  CHECK(s1.str() == s2.str());
}

TEST_CASE("PL diagnostic on the toy trace") {
  ToyProblem p(0.5);
  const IterationTrace tr = run_iadca(p, p.e(), {}, {0.0, 20});
  const PlDiagnostic d = pl_estimate(tr, 0.0);
  REQUIRE(d.available);
  CHECK(d.rate == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(d.theta_hat == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(d.loglog_slope == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(d.linear_regime);
  // rho_{k+1} = (rho_k - rho_{k+1}) / 3
  CHECK(d.c_hat == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  CHECK_FALSE(pl_estimate(run_iadca(p, p.e(), {}, {0.0, 2}), 0.0).available);
}

TEST_CASE("trace csv header") {
  ToyProblem p(0.5);
  std::ostringstream s;
  write_trace_csv(run_iadca(p, p.e(), {}, {0.0, 1}), s);
  CHECK(s.str().rfind("k,f,eps,step_norm,restarts,accel_accepted\n", 0) == 0);
}

TEST_CASE("argument validation") {
  ToyProblem p(0.5);
  IadcaOptions o;
  o.gamma = 1.0;
  CHECK_THROWS_AS(run_iadca(p, p.e(), {}, {}, o), std::invalid_argument);
  o.gamma = 0.5;
  o.eps0 = 2.0;
  CHECK_THROWS_AS(run_iadca(p, p.e(), {}, {}, o), std::invalid_argument);
  CHECK_THROWS_AS(run_iadca(p, p.e(), {}, {1e-6, 0}), std::invalid_argument);
}
