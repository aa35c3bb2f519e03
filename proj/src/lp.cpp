#include "qcorr/lp.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace qcorr {

std::string to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
  }
  return "?";
}

LinearProgram::LinearProgram(int num_vars) {
  var_lower = Eigen::VectorXd::Constant(num_vars, -std::numeric_limits<double>::infinity());
  var_upper = Eigen::VectorXd::Constant(num_vars, std::numeric_limits<double>::infinity());
  objective = Eigen::VectorXd::Zero(num_vars);
  coeffs.resize(0, num_vars);
  rhs.resize(0);
}

void LinearProgram::add_constraint(const Eigen::VectorXd& row, Sense sense, double rhs_value) {
  if (row.size() != num_vars()) throw std::invalid_argument("constraint dimension mismatch");
  coeffs.conservativeResize(coeffs.rows() + 1, num_vars());
  coeffs.row(coeffs.rows() - 1) = row.transpose();
  rhs.conservativeResize(rhs.size() + 1);
  rhs(rhs.size() - 1) = rhs_value;
  senses.push_back(sense);
}

void LinearProgram::validate() const {
  if (coeffs.rows() != static_cast<Eigen::Index>(senses.size()) || coeffs.rows() != rhs.size() ||
      coeffs.cols() != objective.size() || var_lower.size() != objective.size() ||
      var_upper.size() != objective.size())
    throw std::invalid_argument("inconsistent LP dimensions");
  if (!coeffs.allFinite() || !rhs.allFinite() || !objective.allFinite())
    throw std::invalid_argument("LP data must be finite");
  for (int j = 0; j < num_vars(); ++j)
    if (!(var_lower(j) <= var_upper(j)))
      throw std::invalid_argument("variable bounds must satisfy lo <= hi");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-10;
constexpr double kDegenerateStep = 1e-12;
constexpr int kBlandTrigger = 40;

enum class VarState : unsigned char { at_lower, at_upper, basic, free_nonbasic };

// Bounded-variable primal simplex on the equality form [A | I] z = b.
// Slacks start basic; rows whose slack value violates its own bound get an
// artificial column instead (phase I drives those to zero).
class Simplex {
 public:
  Simplex(const LinearProgram& lp, const LpOptions& opt) : lp_(lp), opt_(opt) {
    n_ = lp.num_vars();
    m_ = lp.num_constraints();
  }

  LpSolution run() {
    build();
    LpSolution sol;
    if (!phase1(sol)) return sol;      // infeasible
    if (!phase2(sol)) return sol;      // unbounded
    finish(sol);
    return sol;
  }

 private:
  const LinearProgram& lp_;
  LpOptions opt_;
  int n_ = 0, m_ = 0, total_ = 0, narts_ = 0;
  // row-major: pivoting is row arithmetic
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> T_;
  Eigen::VectorXd lo_, up_, x_, cost_;
  std::vector<VarState> state_;
  std::vector<int> basis_;        // variable basic in each row
  std::vector<int> art_rows_;     // rows carrying an artificial column
  std::vector<double> art_sign_;  // original +-1 coefficient of each artificial
  int iterations_ = 0;
  int degenerate_streak_ = 0;

  void build() {
    // slack bounds: <= gives s in [0,inf), >= gives s in (-inf,0], = fixes 0
    std::vector<double> lo(n_ + m_), up(n_ + m_);
    for (int j = 0; j < n_; ++j) {
      lo[j] = lp_.var_lower(j);
      up[j] = lp_.var_upper(j);
    }
    for (int i = 0; i < m_; ++i) {
      switch (lp_.senses[i]) {
        case Sense::le: lo[n_ + i] = 0; up[n_ + i] = kInf; break;
        case Sense::ge: lo[n_ + i] = -kInf; up[n_ + i] = 0; break;
        case Sense::eq: lo[n_ + i] = 0; up[n_ + i] = 0; break;
      }
    }
    // nonbasic start for structurals: lower bound if finite, else upper, else 0
    x_ = Eigen::VectorXd::Zero(n_ + m_);
    state_.assign(n_ + m_, VarState::at_lower);
    for (int j = 0; j < n_; ++j) {
      if (std::isfinite(lo[j])) {
        x_(j) = lo[j];
        state_[j] = VarState::at_lower;
      } else if (std::isfinite(up[j])) {
        x_(j) = up[j];
        state_[j] = VarState::at_upper;
      } else {
        x_(j) = 0;
        state_[j] = VarState::free_nonbasic;
      }
    }
    Eigen::VectorXd resid = lp_.rhs - lp_.coeffs * x_.head(n_);
    // slack basic where its bound admits the residual, artificial otherwise
    basis_.assign(m_, -1);
    std::vector<int> needs_art;
    for (int i = 0; i < m_; ++i) {
      if (resid(i) >= lo[n_ + i] - 0 && resid(i) <= up[n_ + i] + 0) {
        basis_[i] = n_ + i;
        x_(n_ + i) = resid(i);
        state_[n_ + i] = VarState::basic;
      } else {
        needs_art.push_back(i);
        x_(n_ + i) = resid(i) > 0 ? std::min(0.0, up[n_ + i]) : std::max(0.0, lo[n_ + i]);
        state_[n_ + i] = x_(n_ + i) == lo[n_ + i] ? VarState::at_lower : VarState::at_upper;
      }
    }
    narts_ = static_cast<int>(needs_art.size());
    total_ = n_ + m_ + narts_;
    lo_.resize(total_);
    up_.resize(total_);
    for (int j = 0; j < n_ + m_; ++j) {
      lo_(j) = lo[j];
      up_(j) = up[j];
    }
    x_.conservativeResize(total_);
    state_.resize(total_, VarState::basic);
    T_.setZero(m_, total_);
    T_.block(0, 0, m_, n_) = lp_.coeffs;
    for (int i = 0; i < m_; ++i) T_(i, n_ + i) = 1.0;
    art_rows_ = needs_art;
    art_sign_.resize(narts_);
    for (int k = 0; k < narts_; ++k) {
      const int i = needs_art[k];
      const int col = n_ + m_ + k;
      const double r = resid(i) - x_(n_ + i);
      art_sign_[k] = r >= 0 ? 1.0 : -1.0;
      T_(i, col) = art_sign_[k];
      lo_(col) = 0;
      up_(col) = kInf;
      x_(col) = std::abs(r);
      basis_[i] = col;
      state_[col] = VarState::basic;
    }
    // reduce rows so that every basic column is the identity
    for (int i = 0; i < m_; ++i) {
      const int b = basis_[i];
      if (b >= n_ + m_) {
        if (T_(i, b) < 0) T_.row(i) = -T_.row(i);
        T_(i, b) = 1.0;
      }
    }
  }

  bool phase1(LpSolution& sol) {
    if (narts_ == 0) return true;
    cost_ = Eigen::VectorXd::Zero(total_);
    for (int k = 0; k < narts_; ++k) cost_(n_ + m_ + k) = 1.0;
    const bool ok = iterate(/*allow_unbounded=*/false);
    (void)ok;  // phase-1 objective is bounded below by 0
    double infeas = 0;
    for (int k = 0; k < narts_; ++k) infeas += x_(n_ + m_ + k);
    if (infeas > opt_.feasibility_tol) {
      sol.status = LpStatus::infeasible;
      sol.iterations = iterations_;
      return false;
    }
    drive_out_artificials();
    for (int k = 0; k < narts_; ++k) {
      lo_(n_ + m_ + k) = 0;
      up_(n_ + m_ + k) = 0;  // artificials may never move again
      x_(n_ + m_ + k) = 0;
    }
    return true;
  }

  void drive_out_artificials() {
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < n_ + m_) continue;
      int enter = -1;
      double best = kPivotTol;
      for (int j = 0; j < n_ + m_; ++j) {
        if (state_[j] == VarState::basic) continue;
        if (std::abs(T_(i, j)) > best) {
          best = std::abs(T_(i, j));
          enter = j;
        }
      }
      if (enter < 0) continue;  // redundant row, artificial stays pinned at 0
      pivot(i, enter);  // basis swap at the same point, no values move
    }
  }

  bool phase2(LpSolution& sol) {
    cost_ = Eigen::VectorXd::Zero(total_);
    cost_.head(n_) = lp_.maximize ? (-lp_.objective).eval() : lp_.objective;
    if (!iterate(/*allow_unbounded=*/true)) {
      sol.status = LpStatus::unbounded;
      sol.iterations = iterations_;
      return false;
    }
    return true;
  }

  // Returns false only when the problem is unbounded (and that is allowed).
  bool iterate(bool allow_unbounded) {
    degenerate_streak_ = 0;
    Eigen::VectorXd cb(m_), d(total_);
    for (int it = 0; it < opt_.max_iterations; ++it, ++iterations_) {
      for (int i = 0; i < m_; ++i) cb(i) = cost_(basis_[i]);
      d.noalias() = cost_ - T_.transpose() * cb;
      const bool bland = degenerate_streak_ >= kBlandTrigger;
      const int enter = pick_entering(d, bland);
      if (enter < 0) return true;  // optimal for this phase
      if (!ratio_step(enter, d(enter) < 0 ? +1 : -1)) {
        if (allow_unbounded) return false;
        return true;
      }
    }
    throw std::runtime_error("simplex iteration limit exceeded");
  }

  int pick_entering(const Eigen::VectorXd& d, bool bland) const {
    int best = -1;
    double best_score = opt_.optimality_tol;
    for (int j = 0; j < total_; ++j) {
      if (state_[j] == VarState::basic) continue;
      if (lo_(j) == up_(j)) continue;  // fixed (includes retired artificials)
      double score = 0;
      if (state_[j] == VarState::at_lower && d(j) < -opt_.optimality_tol)
        score = -d(j);
      else if (state_[j] == VarState::at_upper && d(j) > opt_.optimality_tol)
        score = d(j);
      else if (state_[j] == VarState::free_nonbasic && std::abs(d(j)) > opt_.optimality_tol)
        score = std::abs(d(j));
      if (score > 0) {
        if (bland) return j;  // smallest index wins
        if (score > best_score) {
          best_score = score;
          best = j;
        }
      }
    }
    return best;
  }

  // Move entering variable by t*sigma; basic variable i changes at rate
  // -sigma*T(i,enter). Returns false when the step is unbounded.
  bool ratio_step(int enter, int sigma) {
    double t_best = up_(enter) - lo_(enter);  // bound-to-bound flip
    int leave_row = -1;                       // -1 = flip
    int leave_to_upper = 0;
    for (int i = 0; i < m_; ++i) {
      const double rate = -sigma * T_(i, enter);
      const int b = basis_[i];
      double t = kInf;
      int to_upper = 0;
      if (rate > kPivotTol) {
        if (std::isfinite(up_(b))) {
          t = (up_(b) - x_(b)) / rate;
          to_upper = 1;
        }
      } else if (rate < -kPivotTol) {
        if (std::isfinite(lo_(b))) t = (x_(b) - lo_(b)) / (-rate);
      } else {
        continue;
      }
      if (t < 0) t = 0;  // numerical guard
      if (t < t_best - 1e-15 || (t <= t_best + 1e-15 && leave_row >= 0 && b < basis_[leave_row])) {
        t_best = t;
        leave_row = i;
        leave_to_upper = to_upper;
      }
    }
    if (!std::isfinite(t_best)) return false;  // unbounded ray
    degenerate_streak_ = t_best < kDegenerateStep ? degenerate_streak_ + 1 : 0;
    // apply the move
    for (int i = 0; i < m_; ++i) x_(basis_[i]) += -sigma * T_(i, enter) * t_best;
    x_(enter) += sigma * t_best;
    if (leave_row < 0) {
      state_[enter] = sigma > 0 ? VarState::at_upper : VarState::at_lower;
      x_(enter) = sigma > 0 ? up_(enter) : lo_(enter);
      return true;
    }
    const int leaving = basis_[leave_row];
    x_(leaving) = leave_to_upper ? up_(leaving) : lo_(leaving);
    state_[leaving] = leave_to_upper ? VarState::at_upper : VarState::at_lower;
    pivot(leave_row, enter);
    return true;
  }

  void pivot(int row, int enter) {
    const double piv = T_(row, enter);
    T_.row(row) /= piv;
    for (int i = 0; i < m_; ++i) {
      if (i == row) continue;
      const double f = T_(i, enter);
      if (f != 0.0) T_.row(i) -= f * T_.row(row);
    }
    basis_[row] = enter;
    state_[enter] = VarState::basic;
  }

  // One residual-correction pass using the tableau as approximate inverse
  // kills the drift the row operations accumulate.
  void refine() {
    for (int pass = 0; pass < 2; ++pass) {
      Eigen::VectorXd resid = lp_.rhs - lp_.coeffs * x_.head(n_);
      for (int i = 0; i < m_; ++i) resid(i) -= x_(n_ + i);
      for (int k = 0; k < narts_; ++k) resid(art_rows_[k]) -= art_sign_[k] * x_(n_ + m_ + k);
      // columns n..n+m-1 of T are B^{-1} (slack columns started as I)
      Eigen::VectorXd delta = T_.block(0, n_, m_, m_) * resid;
      for (int i = 0; i < m_; ++i) x_(basis_[i]) += delta(i);
    }
  }

  void finish(LpSolution& sol) {
    refine();
    sol.status = LpStatus::optimal;
    sol.x = x_.head(n_);
    sol.objective = lp_.objective.dot(sol.x);
    sol.iterations = iterations_;
    sol.max_violation = check(lp_, sol.x).max_violation;
  }
};

}  // namespace

LpSolution solve(const LinearProgram& lp, const LpOptions& options) {
  lp.validate();
  Simplex s(lp, options);
  return s.run();
}

ConstraintReport check(const LinearProgram& lp, const Eigen::VectorXd& x) {
  if (x.size() != lp.num_vars()) throw std::invalid_argument("assignment dimension mismatch");
  ConstraintReport rep;
  rep.residuals.resize(lp.num_constraints());
  const Eigen::VectorXd ax = lp.coeffs * x;
  for (int i = 0; i < lp.num_constraints(); ++i) {
    const double r = ax(i) - lp.rhs(i);
    switch (lp.senses[i]) {
      case Sense::le: rep.residuals(i) = r; break;
      case Sense::ge: rep.residuals(i) = -r; break;
      case Sense::eq: rep.residuals(i) = std::abs(r); break;
    }
    rep.max_violation = std::max(rep.max_violation, rep.residuals(i));
  }
  for (int j = 0; j < lp.num_vars(); ++j) {
    rep.max_violation = std::max(rep.max_violation, lp.var_lower(j) - x(j));
    rep.max_violation = std::max(rep.max_violation, x(j) - lp.var_upper(j));
  }
  return rep;
}

void dump(const LinearProgram& lp, std::ostream& out) {
  out << (lp.maximize ? "maximize" : "minimize");
  for (int j = 0; j < lp.num_vars(); ++j)
    if (lp.objective(j) != 0) out << " " << lp.objective(j) << "*x" << j;
  out << "\n";
  for (int i = 0; i < lp.num_constraints(); ++i) {
    bool first = true;
    for (int j = 0; j < lp.num_vars(); ++j) {
      if (lp.coeffs(i, j) == 0) continue;
      out << (first ? "" : " + ") << lp.coeffs(i, j) << "*x" << j;
      first = false;
    }
    if (first) out << "0";
    const char* rel = lp.senses[i] == Sense::le ? "<=" : lp.senses[i] == Sense::ge ? ">=" : "=";
    out << " " << rel << " " << lp.rhs(i) << "\n";
  }
  for (int j = 0; j < lp.num_vars(); ++j)
    out << lp.var_lower(j) << " <= x" << j << " <= " << lp.var_upper(j) << "\n";
}

}  // namespace qcorr
