#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dcflow/expression.hpp"
#include "dcflow/pdeco.hpp"
#include "dense_problem.hpp"

using namespace dcflow;
using namespace dcflow::pdeco;

namespace {

P0Field random_control(const ControlProblem& p, std::mt19937& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  P0Field v(p.mesh.triangle_count());
  for (double& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST_CASE("expressions") {
  const auto f = compile_expression("sin(2*pi*x)*sin(2*pi*y)*exp(2*x)/6");
  const double pi = std::numbers::pi;
  CHECK(f(0.3, 0.7) ==
        doctest::Approx(std::sin(2 * pi * 0.3) * std::sin(2 * pi * 0.7) * std::exp(0.6) / 6));
  CHECK(compile_expression("-2^2")(0, 0) == doctest::Approx(-4.0));
  CHECK(compile_expression("2^3^2")(0, 0) == doctest::Approx(512.0));
  CHECK(compile_expression("abs(x - y) + sqrt(4) + log(exp(1))")(1, 3) == doctest::Approx(5.0));
  CHECK(compile_expression("0")(0.5, 0.5) == 0.0);
  CHECK_THROWS_AS(compile_expression("sin(x"), ExpressionError);
  CHECK_THROWS_AS(compile_expression("z + 1"), ExpressionError);
  CHECK_THROWS_AS(compile_expression("1 +"), ExpressionError);
  CHECK_THROWS_AS(compile_expression("foo(1)"), ExpressionError);
}

TEST_CASE("custom data matches the built-in example") {
  const ProblemData a = example1();
  const ProblemData b = custom_data("sin(2*pi*x)*sin(2*pi*y)*exp(2*x)/6", "0", "0", -20, 20);
  for (double x : {0.1, 0.45, 0.8}) {
    CHECK(a.y_d(x, 0.3) == doctest::Approx(b.y_d(x, 0.3)).epsilon(1e-15));
  }
  CHECK(named_data("2").name == "example2");
  CHECK_THROWS(named_data("3"));
}

TEST_CASE("problem assembly and validation") {
  const ControlProblem p = make_control_problem(8, example1(), 1e-2);
  CHECK(p.mesh.interior_count() == 49);
  CHECK(p.y_d.size() == 49);
  CHECK(p.u_d.size() == 128);
  double total = 0.0;
  for (double l : p.lumped_mass) total += l;
  CHECK(p.lumped_mass[0] == doctest::Approx(p.mesh.h() * p.mesh.h()));
  CHECK(total == doctest::Approx(49.0 / 64.0));
  CHECK_THROWS(make_control_problem(8, example1(), 0.0));
  CHECK_THROWS(make_control_problem(8, example1(), 1e-2, -1.0));
  CHECK_THROWS(make_control_problem(8, custom_data("0", "0", "0", 1, 2), 1e-2));
}

TEST_CASE("state map is affine and matches the dense oracle") {
  std::mt19937 rng(5);
  const ControlProblem p = make_control_problem(8, example2(), 1e-4);
  const oracle::DenseProblem d = oracle::dense_problem(p);
  const P0Field u1 = random_control(p, rng, 10), u2 = random_control(p, rng, 10);
  const P1Field y1 = solve_state(p, u1), y2 = solve_state(p, u2);
  const P1Field y0 = solve_state(p, P0Field(u1.size()));
  const P1Field ym = solve_state(p, P0Field(0.25 * u1 + 0.75 * u2));
  const oracle::Vec yd = oracle::state(d, u1.raw());
  for (std::size_t i = 0; i < ym.size(); ++i) {
    CHECK(ym[i] == doctest::Approx(0.25 * y1[i] + 0.75 * y2[i]).epsilon(1e-9));
    CHECK(y1[i] == doctest::Approx(yd[i]).epsilon(1e-9));
  }
  CHECK(norm2(y0 - P1Field(Vector(d.w))) <= 1e-10);
}

TEST_CASE("adjoint gives the reduced gradient of the tracking term") {
  std::mt19937 rng(9);
  const ControlProblem p = make_control_problem(8, example1(), 1e-2);
  const P0Field u = random_control(p, rng, 5);
  const P0Field du = random_control(p, rng, 1);
  const P1Field y = solve_state(p, u);
  const P1Field adj = solve_adjoint(p, y);
  const double predicted = dot(spmv_transpose(p.control, adj), du);
  const auto tracking = [&](const P0Field& v) {
    const P1Field r(solve_state(p, v) - p.y_d);
    return 0.5 * dot(r, spmv(p.mass, r));
  };
  const double t = 1e-4;
  const double fd = (tracking(P0Field(u + t * du)) - tracking(P0Field(u - (t * du)))) / (2 * t);
  CHECK(fd == doctest::Approx(predicted).epsilon(1e-6));
}

TEST_CASE("objective pieces, feasibility and lower bound") {
  std::mt19937 rng(1);
  ControlProblem p = make_control_problem(8, example1(), 1e-2);
  p.beta = 0.05;
  for (int trial = 0; trial < 50; ++trial) {
    const P0Field u = random_control(p, rng, 20);
    const ReducedEvaluation ev = objective(p, u);
    CHECK(ev.feasible);
    CHECK(ev.f == doctest::Approx(ev.g - ev.h));
    // alpha/2 ||u||^2 + beta (||u||_1 - ||u||_2) >= -beta^2 / (2 alpha)
    CHECK(ev.f >= -p.beta * p.beta / (2 * p.alpha));
  }
  P0Field bad(p.mesh.triangle_count());
  bad[3] = 21.0;
  CHECK(std::isinf(objective(p, bad).f));
  CHECK_FALSE(feasible(p, bad));
}

TEST_CASE("g is strongly convex with modulus alpha") {
  std::mt19937 rng(2);
  ControlProblem p = make_control_problem(8, example1(), 1e-2);
  p.beta = 0.02;
  for (int trial = 0; trial < 30; ++trial) {
    const P0Field u = random_control(p, rng, 15), v = random_control(p, rng, 15);
    const double gm = objective(p, P0Field(0.5 * u + 0.5 * v)).g;
    const double avg = 0.5 * (objective(p, u).g + objective(p, v).g);
    const double dist2 = fem::inner_p0(p.mesh, P0Field(u - v), P0Field(u - v));
    CHECK(gm <= avg - p.alpha / 8.0 * dist2 + 1e-12);
  }
}

TEST_CASE("h subgradient inequality") {
  std::mt19937 rng(4);
  ControlProblem p = make_control_problem(4, example1(), 1e-2);
  p.beta = 0.3;
  const P0Field w = random_control(p, rng, 3);
  const P0Field v = h_subgradient(p, w);
  const double hw = p.beta * fem::norm_l2_p0(p.mesh, w);
  for (int trial = 0; trial < 50; ++trial) {
    const P0Field u = random_control(p, rng, 3);
    const double hu = p.beta * fem::norm_l2_p0(p.mesh, u);
    CHECK(hu >= hw + fem::inner_p0(p.mesh, v, P0Field(u - w)) - 1e-12);
  }
  CHECK(h_subgradient(p, P0Field(w.size())) == P0Field(w.size()));
}

TEST_CASE("beta_c matches the dense oracle") {
  for (const ProblemData& data : {example1(), example2()}) {
    const ControlProblem p = make_control_problem(8, data, 1e-4);
    const oracle::DenseProblem d = oracle::dense_problem(p);
    oracle::Vec r(d.y_d.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = d.y_d[i] - d.w[i];
    const oracle::Vec q = oracle::cholesky_solve(d.a, oracle::matvec(d.mass, r));
    double ref = 0.0;
    for (double v : q) ref = std::max(ref, std::abs(v));
    CHECK(beta_c(p) == doctest::Approx(ref).epsilon(1e-9));
  }
}
