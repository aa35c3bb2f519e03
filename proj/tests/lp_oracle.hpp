#pragma once

// Exhaustive vertex-enumeration oracle for tiny LPs with finite boxes.
// Independent of the simplex implementation path: candidate points are the
// intersections of every V-subset of hyperplanes (constraint rows taken as
// equalities, plus individual bound planes).

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "qcorr/lp.hpp"

namespace qcorr::testing {

struct OracleResult {
  bool feasible = false;
  double objective = 0.0;
  Eigen::VectorXd x;
};

inline OracleResult enumerate_vertices(const LinearProgram& lp, double tol = 1e-9) {
  const int V = lp.num_vars();
  const int R = lp.num_constraints();
  const int planes = R + 2 * V;
  OracleResult best;

  auto plane_row = [&](int p, Eigen::VectorXd& row, double& rhs) {
    if (p < R) {
      row = lp.coeffs.row(p).transpose();
      rhs = lp.rhs(p);
    } else if (p < R + V) {
      row = Eigen::VectorXd::Zero(V);
      row(p - R) = 1;
      rhs = lp.var_lower(p - R);
    } else {
      row = Eigen::VectorXd::Zero(V);
      row(p - R - V) = 1;
      rhs = lp.var_upper(p - R - V);
    }
  };

  auto consider = [&](const Eigen::VectorXd& x) {
    const auto rep = check(lp, x);
    if (rep.max_violation > tol) return;
    const double obj = lp.objective.dot(x);
    if (!best.feasible || (lp.maximize ? obj > best.objective : obj < best.objective)) {
      best.feasible = true;
      best.objective = obj;
      best.x = x;
    }
  };

  std::vector<int> combo(V);
  // iterate over all V-subsets of plane indices
  std::vector<int> idx(V);
  for (int i = 0; i < V; ++i) idx[i] = i;
  Eigen::MatrixXd M(V, V);
  Eigen::VectorXd rhs(V), row(V);
  while (true) {
    for (int i = 0; i < V; ++i) {
      double b;
      plane_row(idx[i], row, b);
      M.row(i) = row.transpose();
      rhs(i) = b;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    if (lu.isInvertible()) consider(lu.solve(rhs));
    // next combination
    int k = V - 1;
    while (k >= 0 && idx[k] == planes - V + k) --k;
    if (k < 0) break;
    ++idx[k];
    for (int j = k + 1; j < V; ++j) idx[j] = idx[j - 1] + 1;
  }
  return best;
}

}  // namespace qcorr::testing
