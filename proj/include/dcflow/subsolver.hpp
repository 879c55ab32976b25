#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "dcflow/pdeco.hpp"

namespace dcflow::subsolver {

using fem::P0Field;
using fem::P1Field;
using pdeco::ControlProblem;

/// Per-triangle branch of the complementarity function.
enum class SetLabel : std::uint8_t { lower, zero, upper, neg, pos };

using Partition = std::vector<SetLabel>;

struct Bounds {
  double lower = -1.0;
  double upper = 1.0;
};

struct PartitionCounts {
  long lower = 0, zero = 0, upper = 0, neg = 0, pos = 0;
};

PartitionCounts count(const Partition& partition);

/// Primal-dual point of the discretized subproblem. The adjoint follows the
/// sign of the KKT system, M y + A-bar^T z = M y_d, so z is the negative of
/// pdeco::solve_adjoint. mu is the combined multiplier of the L1 term and the
/// box constraints.
struct KktState {
  P1Field y;
  P1Field z;
  P0Field u;
  P0Field mu;
  Partition partition;
  double eta = 0.0;
};

struct KktResiduals {
  double state = 0.0;
  double adjoint = 0.0;
  double stationarity = 0.0;
  double complementarity = 0.0;

  double eta() const;
};

/// Subproblem min g(u) - beta <d, u>. d is w/||w|| or zero.
struct SubproblemSpec {
  P0Field d;
  double target_eta = 0.0;
  double eps = 0.0;
};

/// Spec with target residual slaved to eps: eta* = 0.9 sqrt(2 alpha eps).
SubproblemSpec make_spec(const ControlProblem& p, P0Field d, double eps);

/// Residual norms of the four KKT rows. P1 rows are measured in the
/// lumped-mass dual norm, P0 rows after division by |T|.
KktResiduals kkt_residual(const ControlProblem& p, const KktState& s, const P0Field& d);

/// Bracket of the fourth KKT row (before multiplication by the P0 mass).
linalg::Vector complementarity_row(const P0Field& u, const P0Field& mu, double alpha, double beta,
                                   Bounds bounds);

Partition active_set_partition(const P0Field& u, const P0Field& mu, double alpha, double beta,
                               Bounds bounds);

/// Upper bound on F(u) - min F from the strong convexity of F, with y and z
/// recomputed exactly from u. +inf when u is infeasible.
double certify_epsilon(const ControlProblem& p, const KktState& s, const P0Field& d);

/// Newton system in (y, z) for a fixed partition; the control and the
/// multiplier are eliminated triangle by triangle.
struct NewtonSystem {
  linalg::SparseMatrix matrix;
  linalg::Vector rhs;
};

NewtonSystem assemble_newton_system(const ControlProblem& p, const Partition& partition,
                                    const P0Field& d);
/// Recovers (u, mu) from a solved (y, z) and the partition.
KktState recover_state(const ControlProblem& p, const Partition& partition, const P0Field& d,
                       linalg::Vector yz);

struct ActiveSetIteration {
  int iteration = 0;
  double eta = 0.0;
  double certified_eps = 0.0;
  PartitionCounts counts;
};

struct SubproblemResult {
  KktState state;
  double certified_eps = 0.0;
  int iterations = 0;
  /// True when the partition reproduced itself (exact discrete solution).
  bool converged = false;
  std::vector<ActiveSetIteration> history;
};

class SubsolverError : public std::runtime_error {
 public:
  SubsolverError(const std::string& what, double eta) : std::runtime_error(what), eta_(eta) {}
  double eta() const { return eta_; }

 private:
  double eta_;
};

struct ActiveSetOptions {
  int max_iterations = 100;
};

/// Primal-dual active-set method with simultaneous set updates. The last
/// partition is kept as the warm start of the next solve.
class ActiveSetSolver {
 public:
  explicit ActiveSetSolver(const ControlProblem& p, ActiveSetOptions options = {});

  SubproblemResult solve(const SubproblemSpec& spec);
  SubproblemResult solve(const SubproblemSpec& spec, const Partition& initial);

  Partition initial_partition() const;
  const Partition& warm_partition() const { return warm_; }
  void reset() { warm_.clear(); }

  struct LogLine {
    int outer = 0;
    int iterations = 0;
    double eta = 0.0;
    double certified_eps = 0.0;
    PartitionCounts counts;
  };
  /// One line per solve; `outer` counts solves since construction.
  const std::vector<LogLine>& log() const { return log_; }
  void write_log_csv(std::ostream& out) const;

 private:
  const ControlProblem& p_;
  ActiveSetOptions options_;
  Partition warm_;
  std::vector<LogLine> log_;
};

SubproblemResult solve_subproblem(const ControlProblem& p, const SubproblemSpec& spec);

}  // namespace dcflow::subsolver
