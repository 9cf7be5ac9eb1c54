#include "ccplan/socp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <vector>

namespace ccplan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Cone layout: the first `nn` slack entries are componentwise nonnegative,
// followed by second-order cones of the listed dimensions.
struct ConeLayout {
  int nn = 0;
  std::vector<int> soc_dims;
  std::vector<int> soc_offsets;
  int total = 0;
  int degree = 0;  // nn + number of SOCs

  void finalize() {
    soc_offsets.resize(soc_dims.size());
    int off = nn;
    for (size_t i = 0; i < soc_dims.size(); ++i) {
      soc_offsets[i] = off;
      off += soc_dims[i];
    }
    total = off;
    degree = nn + static_cast<int>(soc_dims.size());
  }
};

// rho(u) = u0^2 - |u1|^2 for a SOC block.
double soc_res(const Eigen::Ref<const Eigen::VectorXd>& u) {
  return u[0] * u[0] - u.tail(u.size() - 1).squaredNorm();
}

// u' J v with J = diag(1, -I).
double jdot(const Eigen::Ref<const Eigen::VectorXd>& u,
            const Eigen::Ref<const Eigen::VectorXd>& v) {
  return u[0] * v[0] - u.tail(u.size() - 1).dot(v.tail(v.size() - 1));
}

Eigen::VectorXd jmul(const Eigen::Ref<const Eigen::VectorXd>& u) {
  Eigen::VectorXd out = -u;
  out[0] = u[0];
  return out;
}

// Identity element of the cone algebra.
Eigen::VectorXd cone_identity(const ConeLayout& layout) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(layout.total);
  e.head(layout.nn).setOnes();
  for (size_t i = 0; i < layout.soc_dims.size(); ++i) e[layout.soc_offsets[i]] = 1.0;
  return e;
}

// Nesterov-Todd scaling per cone. The scaled point is lambda = W z = W^-1 s.
struct Scaling {
  Eigen::VectorXd w_nn;  // sqrt(s/z) per nonnegative entry
  struct Soc {
    Eigen::VectorXd w;  // NT point, rho(w) = beta2
    Eigen::VectorXd v;  // Jordan square root of w, used for W = P(v)
    double beta2 = 1.0;
    double beta = 1.0;  // rho(v)
  };
  std::vector<Soc> socs;
};

// P(u) x = 2 u (u'x) - rho(u) J x.
Eigen::VectorXd quad_rep_apply(const Eigen::Ref<const Eigen::VectorXd>& u, double rho_u,
                               const Eigen::Ref<const Eigen::VectorXd>& x) {
  Eigen::VectorXd out = 2.0 * u * u.dot(x) - rho_u * jmul(x);
  return out;
}

Scaling compute_scaling(const ConeLayout& layout, const Eigen::VectorXd& s,
                        const Eigen::VectorXd& z) {
  Scaling sc;
  sc.w_nn = (s.head(layout.nn).array() / z.head(layout.nn).array()).sqrt();
  sc.socs.resize(layout.soc_dims.size());
  for (size_t i = 0; i < layout.soc_dims.size(); ++i) {
    const int off = layout.soc_offsets[i];
    const int d = layout.soc_dims[i];
    const auto sb = s.segment(off, d);
    const auto zb = z.segment(off, d);
    const double rs = soc_res(sb);
    const double rz = soc_res(zb);
    const Eigen::VectorXd sbar = sb / std::sqrt(rs);
    const Eigen::VectorXd zbar = zb / std::sqrt(rz);
    const double gamma = std::sqrt((1.0 + sbar.dot(zbar)) / 2.0);
    Eigen::VectorXd wbar = (sbar + jmul(zbar)) / (2.0 * gamma);
    const double beta = std::pow(rs / rz, 0.25);
    Scaling::Soc& soc = sc.socs[i];
    soc.w = beta * wbar;
    soc.beta2 = beta * beta;
    soc.beta = beta;
    soc.v.resize(d);
    const double v0 = std::sqrt((soc.w[0] + beta) / 2.0);
    soc.v[0] = v0;
    soc.v.tail(d - 1) = soc.w.tail(d - 1) / (2.0 * v0);
  }
  return sc;
}

// W x (symmetric scaling matrix applied blockwise).
Eigen::VectorXd scale_apply(const ConeLayout& layout, const Scaling& sc,
                            const Eigen::VectorXd& x) {
  Eigen::VectorXd out(layout.total);
  out.head(layout.nn) = sc.w_nn.cwiseProduct(x.head(layout.nn));
  for (size_t i = 0; i < sc.socs.size(); ++i) {
    const int off = layout.soc_offsets[i];
    const int d = layout.soc_dims[i];
    out.segment(off, d) = quad_rep_apply(sc.socs[i].v, sc.socs[i].beta, x.segment(off, d));
  }
  return out;
}

// W^-1 x.
Eigen::VectorXd scale_apply_inv(const ConeLayout& layout, const Scaling& sc,
                                const Eigen::VectorXd& x) {
  Eigen::VectorXd out(layout.total);
  out.head(layout.nn) = x.head(layout.nn).cwiseQuotient(sc.w_nn);
  for (size_t i = 0; i < sc.socs.size(); ++i) {
    const int off = layout.soc_offsets[i];
    const int d = layout.soc_dims[i];
    const Eigen::VectorXd vinv = jmul(sc.socs[i].v) / sc.socs[i].beta;
    out.segment(off, d) = quad_rep_apply(vinv, 1.0 / sc.socs[i].beta, x.segment(off, d));
  }
  return out;
}

// W'W x = P(w) x.
Eigen::VectorXd scale2_apply(const ConeLayout& layout, const Scaling& sc,
                             const Eigen::VectorXd& x) {
  Eigen::VectorXd out(layout.total);
  out.head(layout.nn) = sc.w_nn.array().square().matrix().cwiseProduct(x.head(layout.nn));
  for (size_t i = 0; i < sc.socs.size(); ++i) {
    const int off = layout.soc_offsets[i];
    const int d = layout.soc_dims[i];
    out.segment(off, d) = quad_rep_apply(sc.socs[i].w, sc.socs[i].beta2, x.segment(off, d));
  }
  return out;
}

// (W'W)^-1 x = P(w^-1) x.
Eigen::VectorXd scale2_apply_inv(const ConeLayout& layout, const Scaling& sc,
                                 const Eigen::VectorXd& x) {
  Eigen::VectorXd out(layout.total);
  out.head(layout.nn) = x.head(layout.nn).cwiseQuotient(sc.w_nn.array().square().matrix());
  for (size_t i = 0; i < sc.socs.size(); ++i) {
    const int off = layout.soc_offsets[i];
    const int d = layout.soc_dims[i];
    const Eigen::VectorXd winv = jmul(sc.socs[i].w) / sc.socs[i].beta2;
    out.segment(off, d) = quad_rep_apply(winv, 1.0 / sc.socs[i].beta2, x.segment(off, d));
  }
  return out;
}

// Jordan product per cone block.
Eigen::VectorXd jordan_product(const ConeLayout& layout, const Eigen::VectorXd& u,
                               const Eigen::VectorXd& v) {
  Eigen::VectorXd out(layout.total);
  out.head(layout.nn) = u.head(layout.nn).cwiseProduct(v.head(layout.nn));
  for (size_t i = 0; i < layout.soc_dims.size(); ++i) {
    const int off = layout.soc_offsets[i];
    const int d = layout.soc_dims[i];
    const auto ub = u.segment(off, d);
    const auto vb = v.segment(off, d);
    out[off] = ub.dot(vb);
    out.segment(off + 1, d - 1) = ub[0] * vb.tail(d - 1) + vb[0] * ub.tail(d - 1);
  }
  return out;
}

// Solves lambda o x = d for x (inverse of the arrow matrix L(lambda)).
Eigen::VectorXd jordan_solve(const ConeLayout& layout, const Eigen::VectorXd& lambda,
                             const Eigen::VectorXd& d) {
  Eigen::VectorXd out(layout.total);
  out.head(layout.nn) = d.head(layout.nn).cwiseQuotient(lambda.head(layout.nn));
  for (size_t i = 0; i < layout.soc_dims.size(); ++i) {
    const int off = layout.soc_offsets[i];
    const int dim = layout.soc_dims[i];
    const auto lb = lambda.segment(off, dim);
    const auto db = d.segment(off, dim);
    const double rho = soc_res(lb);
    const double x0 = (lb[0] * db[0] - lb.tail(dim - 1).dot(db.tail(dim - 1))) / rho;
    out[off] = x0;
    out.segment(off + 1, dim - 1) = (db.tail(dim - 1) - x0 * lb.tail(dim - 1)) / lb[0];
  }
  return out;
}

// Largest step in [0, cap] keeping u + alpha du inside the cone.
double max_step(const ConeLayout& layout, const Eigen::VectorXd& u, const Eigen::VectorXd& du,
                double cap) {
  double alpha = cap;
  for (int i = 0; i < layout.nn; ++i) {
    if (du[i] < 0.0) alpha = std::min(alpha, -u[i] / du[i]);
  }
  for (size_t i = 0; i < layout.soc_dims.size(); ++i) {
    const int off = layout.soc_offsets[i];
    const int d = layout.soc_dims[i];
    const auto ub = u.segment(off, d);
    const auto db = du.segment(off, d);
    // Roots of rho(u + alpha du) = 0; cone exit is the smallest positive one.
    const double a = soc_res(db);
    const double b = 2.0 * jdot(ub, db);
    const double c0 = std::max(soc_res(ub), 0.0);
    double root = kInf;
    if (std::abs(a) < 1e-300) {
      if (b < 0.0) root = -c0 / b;
    } else {
      const double disc = b * b - 4.0 * a * c0;
      if (a < 0.0) {
        root = (-b - std::sqrt(std::max(disc, 0.0))) / (2.0 * a);
      } else if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        const double q = -(b + (b >= 0 ? sq : -sq)) / 2.0;
        double r1 = q / a;
        double r2 = (q != 0.0) ? c0 / q : kInf;
        if (r1 > r2) std::swap(r1, r2);
        if (r1 > 0.0) {
          root = r1;
        } else if (r2 > 0.0) {
          root = r2;
        }
      }
    }
    if (db[0] < 0.0) root = std::min(root, -ub[0] / db[0]);
    alpha = std::min(alpha, root);
  }
  return alpha;
}

// Factors the quasi-definite augmented system
//   [ dI    G' ]
//   [ G  -W'W - dI ]
// with a diagonally pivoted LDL' (valid for quasi-definite matrices) plus
// sign-aware pivot regularization, and removes the regularization by
// refinement against the exact operator.
struct KktSolver {
  const Eigen::MatrixXd& G;
  const ConeLayout& layout;
  const Scaling* scaling = nullptr;
  Eigen::MatrixXd L;
  Eigen::VectorXd D;
  Eigen::VectorXi perm;
  int refine_steps = 6;

  static constexpr double kStaticReg = 1e-10;
  static constexpr double kDynamicReg = 1e-14;

  KktSolver(const Eigen::MatrixXd& g, const ConeLayout& lay) : G(g), layout(lay) {}

  void factor(const Scaling& sc) {
    scaling = &sc;
    const Eigen::Index n = G.cols();
    const Eigen::Index m = G.rows();
    const Eigen::Index size = n + m;

    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(size, size);
    a.topRightCorner(n, m) = G.transpose();
    a.bottomLeftCorner(m, n) = G;
    // Dense W'W, assembled column-wise through the scaling operators.
    for (Eigen::Index j = 0; j < m; ++j) {
      Eigen::VectorXd ej = Eigen::VectorXd::Zero(m);
      ej[j] = 1.0;
      a.block(n, n, m, m).col(j) = -scale2_apply(layout, sc, ej);
    }
    a.diagonal().head(n).array() += kStaticReg;
    a.diagonal().tail(m).array() -= kStaticReg;

    L = Eigen::MatrixXd::Identity(size, size);
    D.resize(size);
    perm.resize(size);
    for (Eigen::Index i = 0; i < size; ++i) perm[i] = static_cast<int>(i);

    for (Eigen::Index j = 0; j < size; ++j) {
      // Largest remaining diagonal entry as the pivot bounds element growth.
      Eigen::Index pivot = j;
      double best = std::abs(a(j, j));
      for (Eigen::Index i = j + 1; i < size; ++i) {
        const double cand = std::abs(a(i, i));
        if (cand > best) {
          best = cand;
          pivot = i;
        }
      }
      if (pivot != j) {
        a.row(j).swap(a.row(pivot));
        a.col(j).swap(a.col(pivot));
        if (j > 0) L.block(j, 0, 1, j).swap(L.block(pivot, 0, 1, j));
        std::swap(perm[j], perm[pivot]);
      }

      double dj = a(j, j);
      // Quasi-definiteness pins the pivot sign by the original block.
      if (perm[j] < n) {
        if (dj < kDynamicReg) dj = kDynamicReg;
      } else if (dj > -kDynamicReg) {
        dj = -kDynamicReg;
      }
      D[j] = dj;

      const Eigen::Index rest = size - j - 1;
      if (rest > 0) {
        const Eigen::VectorXd col = a.col(j).tail(rest);
        L.col(j).tail(rest) = col / dj;
        a.bottomRightCorner(rest, rest).noalias() -= (col / dj) * col.transpose();
      }
    }
  }

  Eigen::VectorXd ldl_solve(const Eigen::VectorXd& b) const {
    const Eigen::Index size = b.size();
    Eigen::VectorXd bp(size);
    for (Eigen::Index i = 0; i < size; ++i) bp[i] = b[perm[i]];
    Eigen::VectorXd y = L.triangularView<Eigen::UnitLower>().solve(bp);
    y.array() /= D.array();
    y = L.transpose().triangularView<Eigen::UnitUpper>().solve(y);
    Eigen::VectorXd out(size);
    for (Eigen::Index i = 0; i < size; ++i) out[perm[i]] = y[i];
    return out;
  }

  // Solves [0 G'; G -W'W] [dx; dz] = [bx; bz] with iterative refinement
  // against the unregularized operator.
  void solve(const Eigen::VectorXd& bx, const Eigen::VectorXd& bz, Eigen::VectorXd& dx,
             Eigen::VectorXd& dz) const {
    const Eigen::Index n = G.cols();
    const Eigen::Index m = G.rows();
    Eigen::VectorXd rhs(n + m);
    rhs.head(n) = bx;
    rhs.tail(m) = bz;
    const double rhs_norm = std::max(1.0, rhs.norm());

    Eigen::VectorXd sol = ldl_solve(rhs);
    Eigen::VectorXd best_sol = sol;
    double best_res = std::numeric_limits<double>::infinity();
    for (int pass = 0; pass < refine_steps; ++pass) {
      Eigen::VectorXd residual(n + m);
      residual.head(n) = bx - G.transpose() * sol.tail(m);
      residual.tail(m) =
          bz - (G * sol.head(n) - scale2_apply(layout, *scaling, sol.tail(m)));
      const double res_norm = residual.norm();
      if (res_norm < best_res) {
        best_res = res_norm;
        best_sol = sol;
      }
      if (res_norm <= 1e-15 * rhs_norm || !std::isfinite(res_norm)) break;
      sol += ldl_solve(residual);
    }
    {
      // Keep the most accurate iterate in case refinement diverged.
      Eigen::VectorXd residual(n + m);
      residual.head(n) = bx - G.transpose() * sol.tail(m);
      residual.tail(m) =
          bz - (G * sol.head(n) - scale2_apply(layout, *scaling, sol.tail(m)));
      if (!(residual.norm() < best_res)) sol = best_sol;
    }
    dx = sol.head(n);
    dz = sol.tail(m);
  }
};

}  // namespace

ConicSolution InteriorPointSolver::solve(const ConicProblem& problem) const {
  problem.validate();

  // Assemble the conic form: minimize c'x subject to Gx + s = h, s in K.
  ConeLayout layout;
  layout.nn = static_cast<int>(problem.affine.size()) + 2 * static_cast<int>(problem.bounds.size());
  for (const SocRow& row : problem.socs) {
    layout.soc_dims.push_back(static_cast<int>(row.g.size()) + 1);
  }
  layout.finalize();

  const int n = problem.num_vars;
  const int m = layout.total;
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(m, n);
  Eigen::VectorXd h = Eigen::VectorXd::Zero(m);
  int r = 0;
  for (const AffineRow& row : problem.affine) {
    G.row(r) = row.a.transpose();
    h[r] = row.b;
    ++r;
  }
  for (const VarBound& bound : problem.bounds) {
    G(r, bound.index) = 1.0;
    h[r] = bound.hi;
    ++r;
    G(r, bound.index) = -1.0;
    h[r] = -bound.lo;
    ++r;
  }
  for (size_t i = 0; i < problem.socs.size(); ++i) {
    const SocRow& row = problem.socs[i];
    const int off = layout.soc_offsets[i];
    G.row(off) = -row.c.transpose();
    h[off] = row.d;
    G.block(off + 1, 0, row.F.rows(), n) = -row.F;
    h.segment(off + 1, row.g.size()) = row.g;
  }

  // Row equilibration. Positive per-row scaling (uniform inside each SOC
  // block) preserves the cone and the solution while taming wildly mixed
  // magnitudes from penalty weights and squared-distance constants.
  Eigen::VectorXd row_scale = Eigen::VectorXd::Ones(m);
  for (int i = 0; i < layout.nn; ++i) {
    const double mag = std::max(G.row(i).cwiseAbs().maxCoeff(), std::abs(h[i]));
    if (mag > 1.0) row_scale[i] = 1.0 / mag;
  }
  for (size_t i = 0; i < layout.soc_dims.size(); ++i) {
    const int off = layout.soc_offsets[i];
    const int d = layout.soc_dims[i];
    const double mag = std::max(G.middleRows(off, d).cwiseAbs().maxCoeff(),
                                h.segment(off, d).cwiseAbs().maxCoeff());
    if (mag > 1.0) row_scale.segment(off, d).setConstant(1.0 / mag);
  }
  G = row_scale.asDiagonal() * G;
  h = row_scale.cwiseProduct(h);

  const double cost_scale = std::max(1.0, problem.cost.cwiseAbs().maxCoeff());
  const Eigen::VectorXd c = problem.cost / cost_scale;

  ConicSolution out;
  if (m == 0) {
    // No constraints: optimal iff the objective is identically zero.
    out.status = c.isZero(0.0) ? SolveStatus::Optimal : SolveStatus::DualInfeasible;
    out.x = Eigen::VectorXd::Zero(n);
    return out;
  }

  const Eigen::VectorXd e = cone_identity(layout);
  const double hnorm = h.norm();
  const double cnorm = c.norm();

  // Interior starting point from cone-shifted least-squares estimates.
  Eigen::VectorXd x(n), s(m), z(m);
  {
    ConeLayout unit = layout;
    Scaling sc_unit;
    sc_unit.w_nn = Eigen::VectorXd::Ones(layout.nn);
    sc_unit.socs.resize(layout.soc_dims.size());
    for (size_t i = 0; i < layout.soc_dims.size(); ++i) {
      const int d = layout.soc_dims[i];
      sc_unit.socs[i].w = Eigen::VectorXd::Zero(d);
      sc_unit.socs[i].w[0] = 1.0;
      sc_unit.socs[i].v = sc_unit.socs[i].w;
      sc_unit.socs[i].beta2 = 1.0;
      sc_unit.socs[i].beta = 1.0;
    }
    KktSolver kkt(G, unit);
    kkt.refine_steps = settings_.refine_steps;
    kkt.factor(sc_unit);

    Eigen::VectorXd nu;
    kkt.solve(Eigen::VectorXd::Zero(n), h, x, nu);
    Eigen::VectorXd s_tilde = -nu;
    double margin = kInf;
    for (int i = 0; i < layout.nn; ++i) margin = std::min(margin, s_tilde[i]);
    for (size_t i = 0; i < layout.soc_dims.size(); ++i) {
      const int off = layout.soc_offsets[i];
      const int d = layout.soc_dims[i];
      margin = std::min(margin, s_tilde[off] - s_tilde.segment(off + 1, d - 1).norm());
    }
    s = (margin > 0.0) ? s_tilde : (s_tilde + (1.0 - margin) * e);

    Eigen::VectorXd xd;
    kkt.solve(-c, Eigen::VectorXd::Zero(m), xd, z);
    margin = kInf;
    for (int i = 0; i < layout.nn; ++i) margin = std::min(margin, z[i]);
    for (size_t i = 0; i < layout.soc_dims.size(); ++i) {
      const int off = layout.soc_offsets[i];
      const int d = layout.soc_dims[i];
      margin = std::min(margin, z[off] - z.segment(off + 1, d - 1).norm());
    }
    if (margin <= 0.0) z += (1.0 - margin) * e;
  }
  double tau = 1.0;
  double kappa = 1.0;

  double best_metric = kInf;
  ConicSolution best;
  best.x = x / tau;

  KktSolver kkt(G, layout);
  kkt.refine_steps = settings_.refine_steps;

  for (int iter = 0; iter < settings_.max_iters; ++iter) {
    // Residuals of the homogeneous embedding.
    const Eigen::VectorXd res_x = G.transpose() * z + c * tau;
    const Eigen::VectorXd res_z = s + G * x - h * tau;
    const double res_tau = kappa + c.dot(x) + h.dot(z);
    const double mu = (s.dot(z) + tau * kappa) / (layout.degree + 1);

    // Unscaled convergence metrics.
    const double cx = c.dot(x) / tau;
    const double hz = h.dot(z) / tau;
    const double pres = (G * x / tau + s / tau - h).norm() / (1.0 + hnorm);
    const double dres = (G.transpose() * z / tau + c).norm() / (1.0 + cnorm);
    const double gap = s.dot(z) / (tau * tau);
    const double relgap = gap / std::max({1.0, std::abs(cx), std::abs(hz)});

    out.iterations = iter;
    out.primal_residual = pres;
    out.dual_residual = dres;
    out.gap = gap;

    if (settings_.verbose) {
      std::printf("ipm %3d: pres %9.2e dres %9.2e gap %9.2e relgap %9.2e tau %9.2e kappa %9.2e mu %9.2e hx %9.2e hz %9.2e\n",
                  iter, pres, dres, gap, relgap, tau, kappa, mu, res_x.norm(), res_z.norm());
    }

    const double metric = std::max({pres, dres, relgap});
    if (metric < best_metric) {
      best_metric = metric;
      best = out;
      best.x = x / tau;
      best.objective = cost_scale * cx;
      best.iterations = iter;
    }

    if (pres <= settings_.feastol && dres <= settings_.feastol &&
        (gap <= settings_.abstol || relgap <= settings_.reltol)) {
      out.status = SolveStatus::Optimal;
      out.x = x / tau;
      out.objective = cost_scale * cx;
      return out;
    }

    // Infeasibility certificates on the normalized rays.
    const double hz_raw = h.dot(z);
    if (hz_raw < -1e-10 * std::max(1.0, z.norm())) {
      const Eigen::VectorXd zc = z / -hz_raw;
      if ((G.transpose() * zc).norm() <= 1e-9 * std::max(1.0, zc.norm())) {
        out.status = SolveStatus::PrimalInfeasible;
        out.x = x / tau;
        return out;
      }
    }
    const double cx_raw = c.dot(x);
    if (cx_raw < -1e-10 * std::max(1.0, x.norm())) {
      const Eigen::VectorXd xc = x / -cx_raw;
      const Eigen::VectorXd sc2 = s / -cx_raw;
      if ((G * xc + sc2).norm() <= 1e-9 * std::max(1.0, xc.norm())) {
        out.status = SolveStatus::DualInfeasible;
        out.x = x / tau;
        return out;
      }
    }

    const Scaling scaling = compute_scaling(layout, s, z);
    const Eigen::VectorXd lambda = scale_apply(layout, scaling, z);
    kkt.factor(scaling);

    Eigen::VectorXd x1, z1;
    kkt.solve(-c, h, x1, z1);
    // Equals c'x1 + h'z1 - kappa/tau in exact arithmetic; the quadratic form
    // keeps the sign certain when the KKT solve degrades.
    const double denom = -z1.dot(scale2_apply(layout, scaling, z1)) - kappa / tau;

    auto direction = [&](double sigma, const Eigen::VectorXd& ds_rhs, double dkt_rhs,
                         Eigen::VectorXd& dx, Eigen::VectorXd& dz, Eigen::VectorXd& ds,
                         double& dtau, double& dkappa) {
      const double damp = 1.0 - sigma;
      const Eigen::VectorXd w_lam_ds = scale_apply(layout, scaling, jordan_solve(layout, lambda, ds_rhs));
      const Eigen::VectorXd bz = -damp * res_z - w_lam_ds;
      Eigen::VectorXd x2, z2;
      kkt.solve(-damp * res_x, bz, x2, z2);
      dtau = (-damp * res_tau - dkt_rhs / tau - c.dot(x2) - h.dot(z2)) / denom;
      dx = x2 + dtau * x1;
      dz = z2 + dtau * z1;
      ds = w_lam_ds - scale2_apply(layout, scaling, dz);
      dkappa = (dkt_rhs - kappa * dtau) / tau;
    };

    // Predictor (affine) direction.
    Eigen::VectorXd dxa, dza, dsa;
    double dtaua, dkappaa;
    const Eigen::VectorXd minus_ll = -jordan_product(layout, lambda, lambda);
    direction(0.0, minus_ll, -tau * kappa, dxa, dza, dsa, dtaua, dkappaa);

    // Line searches run in the scaled space against lambda, which keeps
    // steps centered near the cone boundary.
    auto scaled_step = [&](const Eigen::VectorXd& ds_dir, const Eigen::VectorXd& dz_dir,
                           double dt, double dk) {
      double a = max_step(layout, lambda, scale_apply_inv(layout, scaling, ds_dir), 10.0);
      a = std::min(a, max_step(layout, lambda, scale_apply(layout, scaling, dz_dir), a));
      if (dt < 0.0) a = std::min(a, -tau / dt);
      if (dk < 0.0) a = std::min(a, -kappa / dk);
      return std::min(a, 1.0);
    };

    const double alpha_aff = scaled_step(dsa, dza, dtaua, dkappaa);
    const double sigma = std::clamp(std::pow(1.0 - alpha_aff, 3.0), 1e-4, 0.9999);

    // Corrector with the Mehrotra second-order term.
    const Eigen::VectorXd corr = jordan_product(layout, scale_apply_inv(layout, scaling, dsa),
                                                scale_apply(layout, scaling, dza));
    const Eigen::VectorXd ds_rhs = minus_ll - corr + sigma * mu * e;
    const double dkt_rhs = -tau * kappa - dtaua * dkappaa + sigma * mu;

    Eigen::VectorXd dx, dz, ds;
    double dtau, dkappa;
    direction(sigma, ds_rhs, dkt_rhs, dx, dz, ds, dtau, dkappa);

    const double alpha = settings_.step_fraction * scaled_step(ds, dz, dtau, dkappa);

    if (settings_.verbose) {
      const Eigen::VectorXd e1 = G.transpose() * dz + c * dtau + (1.0 - sigma) * res_x;
      const Eigen::VectorXd e2 = G * dx + ds - h * dtau + (1.0 - sigma) * res_z;
      std::printf("  step: alpha_aff %9.2e sigma %9.2e alpha %9.2e dtau %9.2e dkappa %9.2e |e1| %9.2e |e2| %9.2e\n",
                  alpha_aff, sigma, alpha, dtau, dkappa, e1.norm(), e2.norm());
    }

    if (alpha < 1e-10 || !std::isfinite(alpha)) break;  // stalled or numerics dead end

    x += alpha * dx;
    z += alpha * dz;
    s += alpha * ds;
    tau += alpha * dtau;
    kappa += alpha * dkappa;

    if (!x.allFinite() || !s.allFinite() || !z.allFinite() || !std::isfinite(tau) ||
        !std::isfinite(kappa)) {
      break;
    }
    if (tau < 1e-12 * std::max(1.0, kappa)) break;

    // The embedding is positively homogeneous; renormalizing to tau = 1
    // keeps the iterate from sliding along the scaling ray.
    x /= tau;
    z /= tau;
    s /= tau;
    kappa /= tau;
    tau = 1.0;
  }

  // Report the best iterate; accept it when it is close to tolerance.
  out = best;
  out.status = best_metric <= 1e3 * std::max({settings_.feastol, settings_.reltol})
                   ? SolveStatus::Optimal
                   : SolveStatus::NumericalFailure;
  return out;
}

}  // namespace ccplan
