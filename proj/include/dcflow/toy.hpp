#pragma once

#include <optional>

#include "dcflow/dc_core.hpp"

namespace dcflow::toy {

/// g(u) = 1/2 ||u||^2, h(u) = (alpha/2) <u, e>^2 on L^2(0,1), discretized by
/// n-point midpoint quadrature (weight 1/n) so that ||e|| = 1 exactly.
///
/// The unique stationary point is 0 and f satisfies the PL inequality with
/// theta = 1/2, C = 1/sqrt(2(1 - alpha)). With exact steps from u0 = e the
/// DCA iterates are alpha^k e.
class ToyProblem final : public DcProblem {
 public:
  explicit ToyProblem(double alpha, std::size_t n = 64, std::optional<double> noise = {});

  double alpha() const { return alpha_; }
  std::size_t n() const { return n_; }
  const Vector& e() const { return e_; }

  double sigma_g() const override { return 1.0; }
  double sigma_h() const override { return 0.0; }
  double objective(const Vector& u) const override;
  Vector eps_subgradient_h(const Vector& w, double eps) const override;
  ArgminResult eps_argmin_linearized(const Vector& v, double eps) override;
  double inner_product(const Vector& x, const Vector& y) const override;

  Vector gradient(const Vector& u) const;

 private:
  double alpha_;
  std::size_t n_;
  Vector e_;
  std::optional<double> noise_;
};

double toy_objective(const ToyProblem& p, const Vector& u);
Vector toy_eps_subgradient_h(const ToyProblem& p, const Vector& w, double eps);
/// Exact minimizer u = v, or v + delta with 1/2||delta||^2 = min(eps, noise)
/// when noise is given; delta is a fixed deterministic direction.
ArgminResult toy_eps_argmin(const ToyProblem& p, const Vector& v, double eps,
                            std::optional<double> noise = {});

}  // namespace dcflow::toy
