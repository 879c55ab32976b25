#include "dcflow/dc_core.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace dcflow {

double DcProblem::norm(const Vector& x) const { return std::sqrt(inner_product(x, x)); }

std::string to_string(AccelMode mode) {
  switch (mode) {
    case AccelMode::none: return "none";
    case AccelMode::nesterov: return "nesterov";
    case AccelMode::heavy_ball: return "heavyball";
  }
  return "none";
}

AccelMode parse_accel_mode(const std::string& name) {
  if (name == "none") return AccelMode::none;
  if (name == "nesterov") return AccelMode::nesterov;
  if (name == "heavyball" || name == "heavy_ball") return AccelMode::heavy_ball;
  throw std::invalid_argument("unknown acceleration mode '" + name + "'");
}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::relative_change: return "relative_change";
    case StopReason::eps_floor: return "eps_floor";
    case StopReason::max_iterations: return "max_iterations";
  }
  return "max_iterations";
}

bool adaptive_accept(double eps_k, double sigma_g, double sigma_h, double dist) {
  return eps_k <= ((sigma_g + sigma_h) / 32.0) * dist * dist;
}

Vector select_w(const Vector& u_k, AccelerationState& accel,
                const std::function<double(const Vector&)>& f_eval, double f_uk,
                bool* accepted) {
  if (accepted) *accepted = false;
  if (accel.t < 1.0) throw std::invalid_argument("select_w: Nesterov sequence t_k < 1");

  double factor = 0.0;
  switch (accel.mode) {
    case AccelMode::none:
      return u_k;
    case AccelMode::nesterov: {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * accel.t * accel.t));
      factor = (accel.t - 1.0) / t_next;
      accel.t = t_next;
      break;
    }
    case AccelMode::heavy_ball:
      factor = accel.momentum;
      break;
  }

  if (accel.previous.empty() || factor == 0.0) return u_k;
  Vector z = u_k;
  for (std::size_t i = 0; i < z.size(); ++i) z[i] += factor * (u_k[i] - accel.previous[i]);
  if (z == u_k) return u_k;

  // look-back window of one iterate
  const double f_z = f_eval(z);
  if (f_z <= f_uk) {
    if (accepted) *accepted = true;
    return z;
  }
  return u_k;
}

IterationTrace run_iadca(DcProblem& problem, const Vector& u0, AccelerationState accel,
                         const StopRule& stop, const IadcaOptions& options) {
  if (!(options.gamma > 0.0 && options.gamma < 1.0)) {
    throw std::invalid_argument("run_iadca: gamma must lie in (0,1)");
  }
  if (!(options.eps0 > 0.0 && options.eps0 <= 1.0)) {
    throw std::invalid_argument("run_iadca: eps0 must lie in (0,1]");
  }
  if (stop.rel_tol < 0.0 || stop.max_iterations < 1) {
    throw std::invalid_argument("run_iadca: invalid stop rule");
  }
  const double sg = problem.sigma_g();
  const double sh = problem.sigma_h();
  if (!(sg + sh > 0.0)) {
    throw std::invalid_argument("run_iadca: sigma_g + sigma_h must be positive");
  }

  IterationTrace trace;
  trace.sigma_g = sg;
  trace.sigma_h = sh;
  trace.f0 = problem.objective(u0);
  if (!std::isfinite(trace.f0)) throw std::invalid_argument("run_iadca: f(u0) not finite");
  trace.iterates.push_back(u0);

  const auto f_eval = [&problem](const Vector& x) { return problem.objective(x); };

  Vector u = u0;
  double f_u = trace.f0;
  double eps = options.eps0;

  for (int k = 0; k < stop.max_iterations; ++k) {
    IterationRecord rec;
    rec.k = k;
    rec.f_prev = f_u;

    // Step 1
    const Vector w = select_w(u, accel, f_eval, f_u, &rec.accel_accepted);
    rec.f_w = rec.accel_accepted ? problem.objective(w) : f_u;

    // Steps 2-4; both oracles are re-queried on every restart
    ArgminResult step;
    double dist = 0.0;
    int restarts = 0;
    bool floor_hit = false;
    for (;;) {
      const double eps_sub =
          options.subgradient_eps_exponent == 1.0
              ? eps
              : std::pow(eps, options.subgradient_eps_exponent);
      const Vector v = problem.eps_subgradient_h(w, eps_sub);
      step = problem.eps_argmin_linearized(v, eps);
      dist = problem.norm(step.u - w);
      rec.eps_effective = std::min(eps, step.certified_eps);
      if (!options.adaptive || adaptive_accept(rec.eps_effective, sg, sh, dist)) break;
      if (restarts == options.restart_cap) {
        throw CriticalPointError("run_iadca: adaptive loop exceeded " +
                                     std::to_string(options.restart_cap) +
                                     " restarts at iteration " + std::to_string(k) +
                                     ", ||u^{k+1}-w^k|| = " + std::to_string(dist),
                                 dist, k);
      }
      eps *= options.gamma;
      ++restarts;
      if (eps < options.eps_floor) {
        floor_hit = true;
        break;
      }
    }
    if (floor_hit) {
      trace.reason = StopReason::eps_floor;
      return trace;
    }

    rec.eps = eps;
    rec.step_norm = dist;
    rec.restarts = restarts;
    rec.f = problem.objective(step.u);
    rec.stats = std::move(step.stats);

    const double change = problem.norm(step.u - u) / std::max(problem.norm(u), 1.0);
    accel.previous = std::move(u);
    u = std::move(step.u);
    f_u = rec.f;
    trace.iterates.push_back(u);
    trace.records.push_back(std::move(rec));
    if (options.on_iterate) options.on_iterate(trace.records.back(), u);

    // Step 5: eps_{k+1} = eps_k
    if (change <= stop.rel_tol) {
      trace.reason = StopReason::relative_change;
      return trace;
    }
    if (eps < options.eps_floor) {
      trace.reason = StopReason::eps_floor;
      return trace;
    }
  }
  trace.reason = StopReason::max_iterations;
  return trace;
}

std::vector<int> verify_descent(const IterationTrace& trace, double slack_rel) {
  std::vector<int> bad;
  const double c = (trace.sigma_g + trace.sigma_h) / 8.0;
  for (const IterationRecord& r : trace.records) {
    const double slack = slack_rel * std::max(1.0, std::abs(r.f_prev));
    const double lower = c * r.step_norm * r.step_norm;
    const double mid = r.f_w - r.f;
    const double upper = r.f_prev - r.f;
    const bool ok = std::isfinite(mid) && lower <= mid + slack && mid <= upper + slack &&
                    r.f <= r.f_prev + slack;
    if (!ok) bad.push_back(r.k);
  }
  return bad;
}

std::vector<int> verify_adaptive(const IterationTrace& trace) {
  std::vector<int> bad;
  double prev_eps = std::numeric_limits<double>::infinity();
  for (const IterationRecord& r : trace.records) {
    if (!adaptive_accept(r.eps_effective, trace.sigma_g, trace.sigma_h, r.step_norm) ||
        r.eps > prev_eps || r.eps_effective > r.eps) {
      bad.push_back(r.k);
    }
    prev_eps = r.eps;
  }
  return bad;
}

namespace {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  LineFit fit;
  fit.slope = den != 0.0 ? (n * sxy - sx * sy) / den : 0.0;
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

}  // namespace

PlDiagnostic pl_estimate(const IterationTrace& trace, double f_bar) {
  PlDiagnostic out;
  std::vector<double> rho{trace.f0 - f_bar};
  for (const IterationRecord& r : trace.records) rho.push_back(r.f - f_bar);

  // keep the prefix where the gap stays strictly positive
  std::size_t len = 0;
  while (len < rho.size() && rho[len] > 0.0 && std::isfinite(rho[len])) ++len;
  if (len < 5) return out;

  std::vector<double> lx, ly, lk, lrho;
  std::vector<double> tx, ty;
  for (std::size_t k = 0; k < len; ++k) {
    lk.push_back(static_cast<double>(k));
    lrho.push_back(std::log(rho[k]));
  }
  for (std::size_t k = 0; k + 1 < len; ++k) {
    lx.push_back(std::log(rho[k]));
    ly.push_back(std::log(rho[k + 1]));
    const double drop = rho[k] - rho[k + 1];
    if (drop > 0.0) {
      tx.push_back(std::log(rho[k + 1]));
      ty.push_back(std::log(drop));
    }
  }
  if (tx.size() < 4) return out;

  const LineFit per_step = least_squares(lk, lrho);
  const LineFit loglog = least_squares(lx, ly);
  // rho_{k+1}^{2 theta} = C (rho_k - rho_{k+1})  <=>  log drop = 2 theta log rho_{k+1} - log C
  const LineFit recursion = least_squares(tx, ty);

  out.available = true;
  out.rate = std::exp(per_step.slope);
  out.loglog_slope = loglog.slope;
  out.theta_hat = 0.5 * recursion.slope;
  out.c_hat = std::exp(-recursion.intercept);
  out.linear_regime = out.rate < 1.0 && out.theta_hat <= 0.5 + 0.05;
  return out;
}

void write_trace_csv(const IterationTrace& trace, std::ostream& out) {
  out << "k,f,eps,step_norm,restarts,accel_accepted\n";
  char buf[256];
  for (const IterationRecord& r : trace.records) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%d,%d\n", r.k, r.f, r.eps, r.step_norm,
                  r.restarts, r.accel_accepted ? 1 : 0);
    out << buf;
  }
}

}  // namespace dcflow
