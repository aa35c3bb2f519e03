#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <limits>
#include <vector>

namespace qcorr {

enum class Sense { le, ge, eq };
enum class LpStatus { optimal, infeasible, unbounded };

std::string to_string(LpStatus s);

/// Small dense LP with box-bounded variables:
///   min/max c.x  s.t.  A x {<=,>=,=} b,  lo <= x <= hi.
struct LinearProgram {
  Eigen::VectorXd var_lower;  // box bounds, +-inf allowed
  Eigen::VectorXd var_upper;
  Eigen::MatrixXd coeffs;     // one constraint per row
  std::vector<Sense> senses;
  Eigen::VectorXd rhs;
  Eigen::VectorXd objective;
  bool maximize = false;

  explicit LinearProgram(int num_vars = 0);
  int num_vars() const { return static_cast<int>(objective.size()); }
  int num_constraints() const { return static_cast<int>(senses.size()); }

  void add_constraint(const Eigen::VectorXd& row, Sense sense, double rhs_value);
  /// Throws std::invalid_argument on dimension mismatch, non-finite
  /// coefficients or lo > hi.
  void validate() const;
};

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  double objective = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd x;
  double max_violation = 0.0;  // residual of the returned point
  int iterations = 0;
};

struct LpOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  int max_iterations = 50000;
};

/// Bounded-variable primal simplex (two-phase, Dantzig pricing with Bland
/// fallback for anti-cycling). Deterministic: identical inputs produce
/// bitwise-identical solutions. Infeasible/unbounded are reported through
/// the status, never thrown.
LpSolution solve(const LinearProgram& lp, const LpOptions& options = {});

/// Per-constraint residuals of an assignment (positive = violated), plus
/// box-bound violations folded into max_violation. Pure diagnostic.
struct ConstraintReport {
  Eigen::VectorXd residuals;
  double max_violation = 0.0;
  bool feasible(double tol) const { return max_violation <= tol; }
};
ConstraintReport check(const LinearProgram& lp, const Eigen::VectorXd& x);

/// Plain-text dump, one constraint per line, for external cross-checking.
void dump(const LinearProgram& lp, std::ostream& out);

}  // namespace qcorr
