#ifndef SYMDIRECT_ORACLE_HPP
#define SYMDIRECT_ORACLE_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <vector>

#include "compiled.hpp"
#include "problem.hpp"

namespace symdirect {

/// Trapezoidal transcription with piecewise-constant controls. Decision
/// vector: node states x_0..x_N, then interval controls u_0..u_{N-1}.
/// Constraints: the N*n defects followed by one row per boundary pin.
class Transcription {
 public:
  using Vector = Eigen::VectorXd;
  using Sparse = Eigen::SparseMatrix<double>;

  Transcription(const ProblemSpec& p, int N) : p_(p), N_(N), n_(p.space.n()), m_(p.space.m()) {
    if (N < 2) throw ValidationError("mesh size must be at least 2");
    if (!p.is_numeric()) throw ValidationError("the oracle needs numeric problem data");
    a_ = p.t0_value();
    b_ = p.t1_value();
    h_ = (b_ - a_) / N;
    const auto slots = p.slots();
    const std::size_t d = n_ + m_;
    std::vector<std::string> vars(slots.begin() + 1, slots.end());
    auto compile = [&](const Expr& e, Fn& out) {
      out.value = CompiledExpr(e, slots);
      for (std::size_t a = 0; a < d; ++a) {
        const Expr da = partial(e, vars[a]);
        out.grad.emplace_back(da, slots);
        for (std::size_t b = a; b < d; ++b) {
          const Expr dab = partial(da, vars[b]);
          if (!is_zero(dab)) out.hess.push_back({a, b, CompiledExpr(dab, slots)});
        }
      }
    };
    compile(p.lagrangian, L_);
    phi_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) compile(p.dynamics[i], phi_[i]);
    for (const auto& pin : p.boundary)
      pins_.push_back({pin.end == Endpoint::Initial ? 0 : N_, pin.state, pin.value.rational().constant_value().get_d()});

    quadratic_ = true;
    auto degree_ok = [&](const Expr& e, int max) {
      std::set<std::string> xu(vars.begin(), vars.end());
      const RatFunc& r = e.rational();
      for (const auto& v : xu)
        if (r.den().depends_on(v)) return false;
      return r.num().degree_in(xu) <= max;
    };
    quadratic_ = degree_ok(p.lagrangian, 2);
    for (const auto& f : p.dynamics) quadratic_ = quadratic_ && degree_ok(f, 1);
  }

  int mesh() const { return N_; }
  std::size_t variables() const { return n_ * (N_ + 1) + m_ * N_; }
  std::size_t constraints() const { return n_ * N_ + pins_.size(); }
  /// Convex QP: L at most quadratic and f affine in (x, u).
  bool quadratic() const { return quadratic_; }
  double time(int k) const { return k == N_ ? b_ : a_ + k * h_; }
  std::size_t x_index(int k, std::size_t i) const { return k * n_ + i; }
  std::size_t u_index(int k, std::size_t j) const { return n_ * (N_ + 1) + k * m_ + j; }

  double objective(const Vector& z) const {
    double J = 0.0;
    for (int k = 0; k < N_; ++k)
      for (int e = 0; e < 2; ++e) J += 0.5 * h_ * L_.value(point(z, k, e));
    return J;
  }

  Vector gradient(const Vector& z) const {
    Vector g = Vector::Zero(variables());
    for (int k = 0; k < N_; ++k)
      for (int e = 0; e < 2; ++e) {
        const auto& pt = point(z, k, e);
        for (std::size_t a = 0; a < n_ + m_; ++a) g[global(k, e, a)] += 0.5 * h_ * L_.grad[a](pt);
      }
    return g;
  }

  Vector constraint_values(const Vector& z) const {
    Vector c(constraints());
    for (int k = 0; k < N_; ++k) {
      std::vector<double> fa(n_);
      const auto& pa = point(z, k, 0);
      for (std::size_t i = 0; i < n_; ++i) fa[i] = phi_[i].value(pa);
      const auto& pb = point(z, k, 1);
      for (std::size_t i = 0; i < n_; ++i)
        c[k * n_ + i] = z[x_index(k + 1, i)] - z[x_index(k, i)] - 0.5 * h_ * (fa[i] + phi_[i].value(pb));
    }
    for (std::size_t r = 0; r < pins_.size(); ++r)
      c[n_ * N_ + r] = z[x_index(pins_[r].node, pins_[r].state)] - pins_[r].value;
    return c;
  }

  Sparse jacobian(const Vector& z) const {
    std::vector<Eigen::Triplet<double>> trip;
    for (int k = 0; k < N_; ++k)
      for (int e = 0; e < 2; ++e) {
        const auto& pt = point(z, k, e);
        for (std::size_t i = 0; i < n_; ++i) {
          const int row = k * n_ + i;
          trip.emplace_back(row, x_index(k + e, i), e == 0 ? -1.0 : 1.0);
          for (std::size_t a = 0; a < n_ + m_; ++a) {
            const double v = phi_[i].grad[a](pt);
            if (v != 0.0) trip.emplace_back(row, global(k, e, a), -0.5 * h_ * v);
          }
        }
      }
    for (std::size_t r = 0; r < pins_.size(); ++r)
      trip.emplace_back(n_ * N_ + r, x_index(pins_[r].node, pins_[r].state), 1.0);
    Sparse J(constraints(), variables());
    J.setFromTriplets(trip.begin(), trip.end());
    return J;
  }

  /// Hessian of J + lambda . c (lower and upper triangles).
  Sparse lagrangian_hessian(const Vector& z, const Vector& lambda) const {
    std::vector<Eigen::Triplet<double>> trip;
    auto add = [&](const Fn& f, double w, int k, int e, const std::vector<double>& pt) {
      if (w == 0.0) return;
      for (const auto& [a, b, expr] : f.hess) {
        const double v = w * expr(pt);
        if (v == 0.0) continue;
        const auto ga = global(k, e, a), gb = global(k, e, b);
        trip.emplace_back(ga, gb, v);
        if (ga != gb) trip.emplace_back(gb, ga, v);
      }
    };
    for (int k = 0; k < N_; ++k)
      for (int e = 0; e < 2; ++e) {
        const std::vector<double> pt = point(z, k, e);
        add(L_, 0.5 * h_, k, e, pt);
        for (std::size_t i = 0; i < n_; ++i) add(phi_[i], -0.5 * h_ * lambda[k * n_ + i], k, e, pt);
      }
    Sparse H(variables(), variables());
    H.setFromTriplets(trip.begin(), trip.end());
    return H;
  }

 private:
  struct Fn {
    CompiledExpr value;
    std::vector<CompiledExpr> grad;
    struct Entry {
      std::size_t a, b;
      CompiledExpr expr;
    };
    std::vector<Entry> hess;
  };
  struct Pin {
    int node;
    std::size_t state;
    double value;
  };

  // e = 0: (t_k, x_k, u_k); e = 1: (t_{k+1}, x_{k+1}, u_k)
  const std::vector<double>& point(const Vector& z, int k, int e) const {
    buf_.resize(1 + n_ + m_);
    buf_[0] = time(k + e);
    for (std::size_t i = 0; i < n_; ++i) buf_[1 + i] = z[x_index(k + e, i)];
    for (std::size_t j = 0; j < m_; ++j) buf_[1 + n_ + j] = z[u_index(k, j)];
    return buf_;
  }
  std::size_t global(int k, int e, std::size_t a) const {
    return a < n_ ? x_index(k + e, a) : u_index(k, a - n_);
  }

  const ProblemSpec& p_;
  int N_;
  std::size_t n_, m_;
  double a_ = 0, b_ = 1, h_ = 0;
  Fn L_;
  std::vector<Fn> phi_;
  std::vector<Pin> pins_;
  bool quadratic_ = false;
  mutable std::vector<double> buf_;
};

struct OracleResult {
  int N = 0;
  double cost = 0.0;
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  std::vector<std::vector<double>> controls;
  double kkt_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  /// False when the convex fast path applies; the result is then global
  /// for the discrete problem.
  bool local = true;

  Solution to_solution() const {
    Solution s;
    s.method = Method::Oracle;
    s.status = Status::Candidate;
    s.cost = cost;
    SampledTrajectory traj;
    traj.times = times;
    traj.states = states;
    traj.controls = controls;
    traj.interval_controls = true;
    s.samples = std::move(traj);
    if (!converged) s.diagnostics.notes.push_back("oracle stopped before reaching the KKT tolerance");
    if (local) s.diagnostics.notes.push_back("local solution of a nonconvex transcription");
    return s;
  }
};

namespace detail {

inline double kkt_residual(const Transcription& tr, const Eigen::VectorXd& z, const Eigen::VectorXd& lambda) {
  const Eigen::VectorXd dual = tr.gradient(z) + tr.jacobian(z).transpose() * lambda;
  return std::max(dual.lpNorm<Eigen::Infinity>(), tr.constraint_values(z).lpNorm<Eigen::Infinity>());
}

}  // namespace detail

/// Newton iteration on the KKT conditions. A convex QP converges in one
/// step; otherwise steps are damped on the KKT residual.
inline OracleResult transcribe_and_solve(const ProblemSpec& p, int N, double tol = 1e-9, int max_iter = 200) {
  const Transcription tr(p, N);
  const std::size_t nv = tr.variables(), nc = tr.constraints();
  Eigen::VectorXd z = Eigen::VectorXd::Zero(nv), lambda = Eigen::VectorXd::Zero(nc);
  OracleResult res;
  res.N = N;
  res.local = !tr.quadratic();
  double r = detail::kkt_residual(tr, z, lambda);

  for (int it = 0; it < max_iter && r > tol; ++it) {
    const auto J = tr.jacobian(z);
    const auto H = tr.lagrangian_hessian(z, lambda);
    std::vector<Eigen::Triplet<double>> trip;
    for (int c = 0; c < H.outerSize(); ++c)
      for (Eigen::SparseMatrix<double>::InnerIterator e(H, c); e; ++e) trip.emplace_back(e.row(), e.col(), e.value());
    for (int c = 0; c < J.outerSize(); ++c)
      for (Eigen::SparseMatrix<double>::InnerIterator e(J, c); e; ++e) {
        trip.emplace_back(nv + e.row(), e.col(), e.value());
        trip.emplace_back(e.col(), nv + e.row(), e.value());
      }
    Eigen::SparseMatrix<double> K(nv + nc, nv + nc);
    K.setFromTriplets(trip.begin(), trip.end());
    K.makeCompressed();
    Eigen::VectorXd rhs(nv + nc);
    rhs << -tr.gradient(z), -tr.constraint_values(z);

    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(K);
    lu.factorize(K);
    if (lu.info() != Eigen::Success) throw SolverError("KKT system is singular (rank defect)");
    const Eigen::VectorXd sol = lu.solve(rhs);
    if (!sol.allFinite() || (K * sol - rhs).lpNorm<Eigen::Infinity>() > 1e-8 * (1.0 + rhs.lpNorm<Eigen::Infinity>()))
      throw SolverError("KKT system is singular (rank defect)");

    const Eigen::VectorXd dz = sol.head(nv), dl = sol.tail(nc) - lambda;
    double step = 1.0;
    Eigen::VectorXd z_try = z + dz, l_try = lambda + dl;
    double r_try = detail::kkt_residual(tr, z_try, l_try);
    for (int back = 0; back < 30 && !(r_try < r) && !tr.quadratic(); ++back) {
      step *= 0.5;
      z_try = z + step * dz;
      l_try = lambda + step * dl;
      r_try = detail::kkt_residual(tr, z_try, l_try);
    }
    z = z_try;
    lambda = l_try;
    r = r_try;
    res.iterations = it + 1;
  }

  res.kkt_residual = r;
  res.converged = r <= tol;
  res.cost = tr.objective(z);
  const std::size_t n = p.space.n(), m = p.space.m();
  for (int k = 0; k <= N; ++k) {
    res.times.push_back(tr.time(k));
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = z[tr.x_index(k, i)];
    res.states.push_back(std::move(x));
  }
  for (int k = 0; k < N; ++k) {
    std::vector<double> u(m);
    for (std::size_t j = 0; j < m; ++j) u[j] = z[tr.u_index(k, j)];
    res.controls.push_back(std::move(u));
  }
  return res;
}

struct ConvergenceRow {
  int N = 0;
  double cost = 0.0;
  double cost_gap = 0.0;
  double state_error = 0.0;
};

/// Oracle runs on each mesh against a closed-form reference. The state
/// error is the sup over 4 subpoints per interval of the linearly
/// interpolated node states.
inline std::vector<ConvergenceRow> convergence_study(const ProblemSpec& p, const std::vector<int>& meshes,
                                                     const Solution& reference) {
  if (!reference.has_closed_form()) throw ValidationError("convergence study needs a closed-form reference");
  const double ref_cost = reference.exact_cost && is_constant(*reference.exact_cost)
                              ? reference.exact_cost->rational().constant_value().get_d()
                              : cost_of(p, reference, 2000);
  detail::TrajectoryEval exact(p, reference);
  std::vector<ConvergenceRow> rows;
  std::vector<double> x;
  for (int N : meshes) {
    const auto res = transcribe_and_solve(p, N);
    ConvergenceRow row{N, res.cost, std::abs(res.cost - ref_cost), 0.0};
    for (int k = 0; k < N; ++k)
      for (int q = 0; q <= 4; ++q) {
        const double w = q / 4.0;
        const double t = (1 - w) * res.times[k] + w * res.times[k + 1];
        exact.state(t, x);
        for (std::size_t i = 0; i < x.size(); ++i) {
          const double xi = (1 - w) * res.states[k][i] + w * res.states[k + 1][i];
          row.state_error = std::max(row.state_error, std::abs(xi - x[i]));
        }
      }
    rows.push_back(row);
  }
  return rows;
}

/// Each doubling shrinks the state error by `factor`, unless both errors
/// are already at the rounding floor.
inline bool error_decays(const std::vector<ConvergenceRow>& rows, double factor = 0.6, double floor = 1e-12) {
  for (std::size_t k = 1; k < rows.size(); ++k) {
    if (rows[k].N != 2 * rows[k - 1].N) continue;
    if (rows[k].state_error <= floor) continue;
    if (rows[k].state_error > factor * rows[k - 1].state_error) return false;
  }
  return true;
}

}  // namespace symdirect

#endif
