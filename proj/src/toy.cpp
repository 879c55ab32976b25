#include "dcflow/toy.hpp"

#include <cmath>
#include <stdexcept>

namespace dcflow::toy {

ToyProblem::ToyProblem(double alpha, std::size_t n, std::optional<double> noise)
    : alpha_(alpha), n_(n), e_(n, 1.0), noise_(noise) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("ToyProblem: alpha in (0,1)");
  if (n == 0) throw std::invalid_argument("ToyProblem: n must be positive");
  if (noise && !(*noise >= 0.0)) throw std::invalid_argument("ToyProblem: noise must be >= 0");
}

double ToyProblem::inner_product(const Vector& x, const Vector& y) const {
  return linalg::dot(x, y) / static_cast<double>(n_);
}

double ToyProblem::objective(const Vector& u) const {
  const double ue = inner_product(u, e_);
  return 0.5 * inner_product(u, u) - 0.5 * alpha_ * ue * ue;
}

Vector ToyProblem::eps_subgradient_h(const Vector& w, double) const {
  return (alpha_ * inner_product(w, e_)) * e_;
}

ArgminResult ToyProblem::eps_argmin_linearized(const Vector& v, double eps) {
  return toy_eps_argmin(*this, v, eps, noise_);
}

Vector ToyProblem::gradient(const Vector& u) const {
  return u - (alpha_ * inner_product(u, e_)) * e_;
}

double toy_objective(const ToyProblem& p, const Vector& u) { return p.objective(u); }

Vector toy_eps_subgradient_h(const ToyProblem& p, const Vector& w, double eps) {
  return p.eps_subgradient_h(w, eps);
}

ArgminResult toy_eps_argmin(const ToyProblem& p, const Vector& v, double eps,
                            std::optional<double> noise) {
  if (v.size() != p.n()) throw linalg::DimensionError("toy_eps_argmin: length mismatch");
  ArgminResult out;
  out.u = v;
  if (!noise || *noise == 0.0 || eps <= 0.0) return out;

  // Alternating +-1 pattern has unit norm under the 1/n quadrature, is
  // orthogonal to e for even n, and scales to the requested objective gap.
  const double gap = std::min(eps, *noise);
  const double amplitude = std::sqrt(2.0 * gap);
  for (std::size_t i = 0; i < v.size(); ++i) out.u[i] += (i % 2 == 0 ? amplitude : -amplitude);
  const Vector delta = out.u - v;
  out.certified_eps = std::min(0.5 * p.inner_product(delta, delta), gap);
  return out;
}

}  // namespace dcflow::toy
