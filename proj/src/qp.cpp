#include "qp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "errors.hpp"

namespace fcmpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One-sided internal row: normal' x >= bound, unit-norm normal.
struct Row {
  Eigen::VectorXd normal;
  double bound;
  int orig;        // original two-sided row
  int side;        // -1 lower, +1 upper, 0 equality
  double inv_norm; // 1 / original row norm
  double insert_sign = 1.0;  // equalities may enter with a flipped normal
};

struct GiProblem {
  std::vector<Row> rows;
  int meq = 0;
};

// Apply the rotation [c s; -s c] to columns (j, k) of M.
void rotate_columns(Eigen::MatrixXd& m, int j, int k, double c, double s) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double a = m(i, j), b = m(i, k);
    m(i, j) = c * a + s * b;
    m(i, k) = -s * a + c * b;
  }
}

}  // namespace

void QpProblem::validate() const {
  const int n = num_vars();
  const int m = num_constraints();
  if (H.rows() != H.cols()) throw ConfigError("qp: H must be square");
  if (g.size() != n) throw ConfigError("qp: g size does not match H");
  if (G.size() > 0 && G.cols() != n) throw ConfigError("qp: G column count does not match H");
  if (lower.size() != m || upper.size() != m) throw ConfigError("qp: bound sizes do not match G");
  if (!H.allFinite() || !g.allFinite() || (G.size() > 0 && !G.allFinite())) {
    throw ConfigError("qp: non-finite problem data");
  }
  const double asym = (H - H.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * std::max(1.0, H.cwiseAbs().maxCoeff())) {
    throw ConfigError("qp: H is not symmetric");
  }
  for (int i = 0; i < m; ++i) {
    if (std::isnan(lower(i)) || std::isnan(upper(i)) || lower(i) > upper(i)) {
      throw ConfigError("qp: constraint row " + std::to_string(i) + " has lower > upper");
    }
  }
}

const char* to_string(QpStatus status) {
  switch (status) {
    case QpStatus::Solved: return "solved";
    case QpStatus::MaxIter: return "max_iter";
    case QpStatus::Infeasible: return "infeasible";
  }
  return "unknown";
}

QpSolution QpSolver::solve(const QpProblem& problem) const { return solve(problem, {}); }

QpSolution QpSolver::solve(const QpProblem& problem, const std::vector<int>& warm_hint) const {
  problem.validate();
  const int n = problem.num_vars();
  const int m = problem.num_constraints();

  QpSolution sol;
  sol.nu = Eigen::VectorXd::Zero(m);

  // Expand two-sided rows into unit-norm one-sided rows, equalities first.
  GiProblem gi;
  bool trivially_infeasible = false;
  for (int pass = 0; pass < 2; ++pass) {
    for (int i = 0; i < m; ++i) {
      const Eigen::VectorXd row = problem.G.row(i).transpose();
      const double norm = row.norm();
      const bool is_eq = problem.lower(i) == problem.upper(i);
      if (norm == 0.0) {
        if (problem.lower(i) > 0.0 || problem.upper(i) < 0.0) trivially_infeasible = true;
        continue;
      }
      if (pass == 0 && is_eq) {
        gi.rows.push_back({row / norm, problem.lower(i) / norm, i, 0, 1.0 / norm});
      } else if (pass == 1 && !is_eq) {
        if (std::isfinite(problem.lower(i))) {
          gi.rows.push_back({row / norm, problem.lower(i) / norm, i, -1, 1.0 / norm});
        }
        if (std::isfinite(problem.upper(i))) {
          gi.rows.push_back({-row / norm, -problem.upper(i) / norm, i, +1, 1.0 / norm});
        }
      }
    }
    if (pass == 0) gi.meq = static_cast<int>(gi.rows.size());
  }
  const int mi = static_cast<int>(gi.rows.size());

  // Cholesky of H, with a tiny escalating ridge for semidefinite inputs.
  Eigen::MatrixXd h = 0.5 * (problem.H + problem.H.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(h);
  double ridge = 1e-12 * std::max(1.0, h.trace() / n);
  for (int attempt = 0; llt.info() != Eigen::Success && attempt < 3; ++attempt) {
    h.diagonal().array() += ridge;
    ridge *= 100.0;
    llt.compute(h);
  }
  if (llt.info() != Eigen::Success) {
    throw ConfigError("qp: H is not positive definite (Cholesky failed)");
  }

  // Unconstrained minimizer and inverse Cholesky factor.
  Eigen::VectorXd x = -llt.solve(problem.g);
  Eigen::MatrixXd j_inv = llt.matrixU().solve(Eigen::MatrixXd::Identity(n, n));

  Eigen::MatrixXd r_mat = Eigen::MatrixXd::Zero(n, n);
  std::vector<int> active;
  Eigen::VectorXd u_act = Eigen::VectorXd::Zero(n);
  std::vector<char> is_active(mi, 0);
  std::vector<char> skipped(mi, 0);  // dependent-and-satisfied rows, see below
  std::vector<char> hinted(mi, 0);
  for (int hrow : warm_hint) {
    if (hrow >= 0 && hrow < mi) hinted[hrow] = 1;
  }

  int iter = 0;
  int next_eq = 0;
  sol.status = QpStatus::Solved;

  if (trivially_infeasible) {
    sol.status = QpStatus::Infeasible;
  }

  const auto drop = [&](int pos) {
    const int q = static_cast<int>(active.size());
    is_active[active[pos]] = 0;
    for (int jj = pos; jj + 1 < q; ++jj) {
      active[jj] = active[jj + 1];
      u_act(jj) = u_act(jj + 1);
      r_mat.col(jj) = r_mat.col(jj + 1);
    }
    active.pop_back();
    // Re-triangularize: zero the subdiagonal left by the column shift.
    for (int jj = pos; jj < static_cast<int>(active.size()); ++jj) {
      const double cc = r_mat(jj, jj), ss = r_mat(jj + 1, jj);
      if (ss == 0.0) continue;
      const double h2 = std::hypot(cc, ss);
      const double c = cc / h2, s = ss / h2;
      for (int k = jj; k < static_cast<int>(active.size()); ++k) {
        const double a = r_mat(jj, k), b = r_mat(jj + 1, k);
        r_mat(jj, k) = c * a + s * b;
        r_mat(jj + 1, k) = -s * a + c * b;
      }
      rotate_columns(j_inv, jj, jj + 1, c, s);
    }
  };

  while (sol.status == QpStatus::Solved) {
    // Choose the next constraint to enforce: pending equalities first, then
    // the most violated inequality (hinted rows take precedence so warm
    // starts revisit the previous active set early).
    int p = -1;
    double flip = 1.0;
    if (next_eq < gi.meq) {
      p = next_eq++;
      if (gi.rows[p].normal.dot(x) - gi.rows[p].bound > 0.0) flip = -1.0;
      gi.rows[p].insert_sign = flip;
    } else {
      double worst = 0.0, worst_hint = 0.0;
      int p_all = -1, p_hint = -1;
      for (int i = gi.meq; i < mi; ++i) {
        if (is_active[i] || skipped[i]) continue;
        const double s = gi.rows[i].normal.dot(x) - gi.rows[i].bound;
        const double eps = 1e-10 * (1.0 + std::abs(gi.rows[i].bound));
        if (s < -eps) {
          if (s < worst) { worst = s; p_all = i; }
          if (hinted[i] && s < worst_hint) { worst_hint = s; p_hint = i; }
        }
      }
      p = (p_hint >= 0) ? p_hint : p_all;
      if (p < 0) break;  // dual and primal feasible: done
    }

    const Eigen::VectorXd np = flip * gi.rows[p].normal;
    const double bp = flip * gi.rows[p].bound;
    double u_plus = 0.0;

    // Inner loop: take dual/primal steps until constraint p becomes active.
    while (true) {
      if (++iter > options_.max_iter) { sol.status = QpStatus::MaxIter; break; }
      const int qq = static_cast<int>(active.size());

      const Eigen::VectorXd d = j_inv.transpose() * np;
      Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
      if (qq < n) z = j_inv.rightCols(n - qq) * d.tail(n - qq);
      Eigen::VectorXd r_step;
      if (qq > 0) {
        r_step = r_mat.topLeftCorner(qq, qq)
                     .triangularView<Eigen::Upper>()
                     .solve(d.head(qq));
      }

      // Longest dual step before an inequality multiplier hits zero.
      double t1 = kInf;
      int l = -1;
      for (int k = 0; k < qq; ++k) {
        if (gi.rows[active[k]].side == 0) continue;  // equalities never leave
        if (r_step(k) > 1e-14) {
          const double tt = u_act(k) / r_step(k);
          if (tt < t1) { t1 = tt; l = k; }
        }
      }

      const double znp = z.dot(np);
      const double sp = np.dot(x) - bp;
      const double t2 = (znp > 1e-13 * std::max(1.0, np.squaredNorm())) ? -sp / znp : kInf;
      const double t = std::min(t1, t2);

      if (t >= kInf) {
        // Dependent normal with nothing to drop: a satisfied constraint is
        // redundant here (skip until x moves again), a violated one proves
        // infeasibility.
        if (std::abs(sp) <= 1e-9) {
          skipped[p] = 1;
          break;
        }
        sol.status = QpStatus::Infeasible;
        break;
      }

      if (t2 >= kInf) {
        // Pure dual step: x unchanged, drop the blocking constraint.
        for (int k = 0; k < qq; ++k) u_act(k) -= t * r_step(k);
        u_plus += t;
        drop(l);
        continue;
      }

      x += t * z;
      if (t > 0.0) std::fill(skipped.begin(), skipped.end(), 0);
      for (int k = 0; k < qq; ++k) u_act(k) -= t * r_step(k);
      u_plus += t;

      if (t == t2) {
        // Full step: constraint p enters the active set. Rotate the tail of
        // d to a single component so R stays triangular.
        Eigen::VectorXd dd = d;
        for (int jj = n - 1; jj > qq; --jj) {
          const double cc = dd(jj - 1), ss = dd(jj);
          if (ss == 0.0) continue;
          const double h2 = std::hypot(cc, ss);
          dd(jj - 1) = h2;
          dd(jj) = 0.0;
          rotate_columns(j_inv, jj - 1, jj, cc / h2, ss / h2);
        }
        r_mat.col(qq).head(qq + 1) = dd.head(qq + 1);
        active.push_back(p);
        u_act(qq) = u_plus;
        is_active[p] = 1;
        break;  // back to constraint selection
      }
      drop(l);
    }
    if (sol.status != QpStatus::Solved) break;
  }

  // Assemble signed multipliers for the original rows. The internal form
  // c'x >= b with multiplier u contributes -u*c to the gradient; translate
  // into H z + g + G' nu = 0 over the original rows, folding in the unit
  // normalization, the upper-side negation, and any equality flip.
  for (std::size_t k = 0; k < active.size(); ++k) {
    const Row& row = gi.rows[active[k]];
    const double side_sign = (row.side == +1) ? -1.0 : 1.0;
    sol.nu(row.orig) -= u_act(static_cast<int>(k)) * row.insert_sign * side_sign * row.inv_norm;
  }

  sol.z = x;
  sol.iterations = iter;
  sol.active_rows = active;
  sol.objective = 0.5 * x.dot(problem.H * x) + problem.g.dot(x);

  // KKT residuals on the original problem.
  Eigen::VectorXd grad = problem.H * x + problem.g;
  if (m > 0) grad += problem.G.transpose() * sol.nu;
  sol.stat_residual = grad.size() > 0 ? grad.cwiseAbs().maxCoeff() : 0.0;
  sol.feas_residual = 0.0;
  sol.comp_residual = 0.0;
  for (int i = 0; i < m; ++i) {
    const double gz = problem.G.row(i).dot(x);
    if (std::isfinite(problem.lower(i))) {
      sol.feas_residual = std::max(sol.feas_residual, problem.lower(i) - gz);
    }
    if (std::isfinite(problem.upper(i))) {
      sol.feas_residual = std::max(sol.feas_residual, gz - problem.upper(i));
    }
    if (sol.nu(i) > 0.0 && std::isfinite(problem.upper(i))) {
      sol.comp_residual = std::max(sol.comp_residual, sol.nu(i) * std::abs(gz - problem.upper(i)));
    } else if (sol.nu(i) < 0.0 && std::isfinite(problem.lower(i))) {
      sol.comp_residual = std::max(sol.comp_residual, -sol.nu(i) * std::abs(gz - problem.lower(i)));
    }
  }

  if (sol.status == QpStatus::Solved &&
      (sol.stat_residual > options_.tol || sol.feas_residual > options_.tol ||
       sol.comp_residual > options_.tol)) {
    sol.status = QpStatus::MaxIter;  // never report solved with bad KKT
  }
  return sol;
}

void dump_problem(const QpProblem& problem, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("dump_problem: cannot open " + path);
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    f << buf;
  };
  const int n = problem.num_vars(), m = problem.num_constraints();
  f << "fcmpc-qp 1\n" << n << " " << m << "\n";
  auto dump_matrix = [&](const char* name, const Eigen::MatrixXd& mat) {
    f << name << "\n";
    for (Eigen::Index i = 0; i < mat.rows(); ++i) {
      for (Eigen::Index j = 0; j < mat.cols(); ++j) {
        if (j) f << " ";
        put(mat(i, j));
      }
      f << "\n";
    }
  };
  dump_matrix("H", problem.H);
  dump_matrix("g", problem.g);
  dump_matrix("G", problem.G);
  dump_matrix("lower", problem.lower);
  dump_matrix("upper", problem.upper);
}

}  // namespace fcmpc
