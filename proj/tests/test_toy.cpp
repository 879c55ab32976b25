#include <doctest.h>

#include <cmath>
#include <random>

#include "dcflow/toy.hpp"

using namespace dcflow;
using toy::ToyProblem;

TEST_CASE("toy objective closed form on multiples of e") {
  const ToyProblem p(0.5);
  CHECK(p.norm(p.e()) == doctest::Approx(1.0).epsilon(1e-15));
  for (double c : {0.0, 1.0, -2.0, 0.125}) {
    CHECK(p.objective(c * p.e()) == doctest::Approx(0.25 * c * c).epsilon(1e-14));
  }
}

TEST_CASE("exact toy steps give u^k = alpha^k e") {
  for (double alpha : {0.3, 0.5, 0.9}) {
    ToyProblem p(alpha);
    Vector u = p.e();
    for (int k = 1; k <= 10; ++k) {
      const Vector v = p.eps_subgradient_h(u, 0.0);
      const ArgminResult r = p.eps_argmin_linearized(v, 0.0);
      CHECK(r.certified_eps == 0.0);
      u = r.u;
      for (double x : u) CHECK(x == doctest::Approx(std::pow(alpha, k)).epsilon(1e-13));
      CHECK(p.objective(u) ==
            doctest::Approx(0.5 * (1 - alpha) * std::pow(alpha, 2 * k)).epsilon(1e-12));
    }
  }
}

TEST_CASE("noisy argmin is an eps-solution and no better than claimed") {
  ToyProblem p(0.5, 64, 1e-3);
  const Vector v = 0.7 * p.e();
  for (double eps : {1e-1, 1e-3, 1e-6}) {
    const ArgminResult r = p.eps_argmin_linearized(v, eps);
    // g(u) - <v,u> - min = 1/2 ||u - v||^2
    const Vector d = r.u - v;
    const double gap = 0.5 * p.inner_product(d, d);
    CHECK(gap <= eps * (1 + 1e-12));
    CHECK(r.certified_eps <= gap * (1 + 1e-12));
    CHECK(r.certified_eps == doctest::Approx(std::min(eps, 1e-3)).epsilon(1e-12));
  }
}

TEST_CASE("PL inequality with C = 1/sqrt(2(1 - alpha))") {
  std::mt19937 rng(2024);
  std::normal_distribution<double> g;
  for (double alpha : {0.3, 0.5, 0.9}) {
    const ToyProblem p(alpha);
    const double c = 1.0 / std::sqrt(2.0 * (1.0 - alpha));
    for (int trial = 0; trial < 200; ++trial) {
      Vector u(p.n());
      for (double& x : u) x = g(rng);
      CHECK(std::sqrt(std::abs(p.objective(u))) <= c * p.norm(p.gradient(u)) + 1e-12);
    }
    // equality along e
    const Vector u = 0.3 * p.e();
    CHECK(std::sqrt(p.objective(u)) == doctest::Approx(c * p.norm(p.gradient(u))));
  }
}

TEST_CASE("toy argument validation") {
  CHECK_THROWS(ToyProblem(0.0));
  CHECK_THROWS(ToyProblem(1.0));
  CHECK_THROWS(ToyProblem(0.5, 0));
  ToyProblem p(0.5, 4);
  CHECK_THROWS_AS(p.eps_argmin_linearized(Vector(3), 0.1), linalg::DimensionError);
}
