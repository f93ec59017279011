#include "gasnet/lp.hpp"

#include "gasnet/errors.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>

namespace gasnet {

namespace {

std::string worst_row(const LpProblem& p, const VectorXd& z) {
    VectorXd viol = p.A * z - p.b;
    int idx = 0;
    viol.maxCoeff(&idx);
    if (!p.row_name.empty() && idx < int(p.row_name.size()) && !p.row_name[idx].empty())
        return p.row_name[idx] + " (violated by " + std::to_string(viol[idx]) + ")";
    return "row " + std::to_string(idx) + " (violated by " + std::to_string(viol[idx]) + ")";
}

double step_length(const VectorXd& v, const VectorXd& dv) {
    double a = 1.0;
    for (int i = 0; i < v.size(); ++i)
        if (dv[i] < 0) a = std::min(a, -v[i] / dv[i]);
    return a;
}

} // namespace

LpSolution lp_solve(const LpProblem& p, const LpOptions& opt) {
    const int m = int(p.A.rows()), n = int(p.A.cols());
    if (p.b.size() != m || p.c.size() != n)
        throw domain_error("lp_solve: inconsistent problem dimensions");
    if (!p.row_name.empty() && int(p.row_name.size()) != m)
        throw domain_error("lp_solve: row_name size mismatch");

    LpSolution sol;
    if (n == 0) {
        sol.z.resize(0);
        sol.y = VectorXd::Zero(m);
        sol.status = (m == 0 || p.b.minCoeff() >= 0) ? LpStatus::optimal : LpStatus::infeasible;
        if (sol.status == LpStatus::infeasible) sol.certificate = worst_row(p, sol.z);
        return sol;
    }
    if (m == 0) {
        sol.z = VectorXd::Zero(n);
        sol.y.resize(0);
        sol.status = p.c.isZero(0) ? LpStatus::optimal : LpStatus::unbounded;
        return sol;
    }

    // row equilibration
    VectorXd rs(m);
    for (int i = 0; i < m; ++i)
        rs[i] = 1.0 / std::max(1.0, p.A.row(i).cwiseAbs().maxCoeff());
    MatrixXd A = rs.asDiagonal() * p.A;
    VectorXd b = rs.cwiseProduct(p.b);
    const VectorXd& c = p.c;

    VectorXd z = VectorXd::Zero(n);
    VectorXd s = (b - A * z).cwiseMax(1.0);
    VectorXd y = VectorXd::Ones(m);

    const double bn = 1.0 + b.lpNorm<Eigen::Infinity>();
    const double cn = 1.0 + c.lpNorm<Eigen::Infinity>();

    // best iterate seen so far; returned on stall or numerical breakdown
    double best_merit = std::numeric_limits<double>::infinity();
    VectorXd best_z = z, best_y = y;
    int stall = 0;

    auto finish = [&](int it) {
        // a stalled run whose best point is within a few digits of tol is an
        // optimum pinned at the floating-point floor, not a failure
        sol.status = best_merit <= 100 * opt.tol ? LpStatus::optimal
                                                 : LpStatus::iteration_limit;
        sol.z = best_z;
        sol.y = rs.cwiseProduct(best_y);
        sol.obj = c.dot(best_z);
        sol.iterations = it;
        return sol;
    };

    for (int it = 0; it < opt.max_iterations; ++it) {
        VectorXd rp = A * z + s - b;
        VectorXd aty = A.transpose() * y;
        VectorXd rd = aty + c;
        double mu = s.dot(y) / m;
        double obj = c.dot(z);
        double relp = rp.lpNorm<Eigen::Infinity>() / bn;
        double reld = rd.lpNorm<Eigen::Infinity>() / (cn + aty.lpNorm<Eigen::Infinity>());
        double gap = s.dot(y) / (1.0 + std::abs(obj));
        double merit = std::max(std::max(relp, reld), gap);

        if (!std::isfinite(merit)) return finish(it);
        if (merit < 0.9 * best_merit) {
            best_merit = merit;
            best_z = z;
            best_y = y;
            stall = 0;
        } else if (++stall >= 10) {
            return finish(it);
        }

        if (relp <= opt.tol && reld <= opt.tol && gap <= opt.tol) {
            sol.status = LpStatus::optimal;
            sol.z = z;
            sol.y = rs.cwiseProduct(y);
            sol.obj = obj;
            sol.iterations = it;
            return sol;
        }
        // divergence of the duals with stalled primal residual signals an
        // empty feasible set
        if (y.lpNorm<Eigen::Infinity>() > 1e10 * cn && relp > 100 * opt.tol) {
            sol.status = LpStatus::infeasible;
            sol.z = z;
            sol.y = rs.cwiseProduct(y);
            sol.obj = obj;
            sol.iterations = it;
            sol.certificate = worst_row(p, z);
            return sol;
        }

        VectorXd d = y.cwiseQuotient(s);
        MatrixXd Msys = A.transpose() * d.asDiagonal() * A;
        double reg = 0.0;
        Eigen::LLT<MatrixXd> llt;
        for (;;) {
            MatrixXd Mr = Msys + reg * MatrixXd::Identity(n, n);
            llt.compute(Mr);
            if (llt.info() == Eigen::Success && llt.solve(VectorXd::Ones(n)).allFinite())
                break;
            reg = reg == 0.0 ? 1e-14 * (1.0 + Msys.trace() / n) : reg * 100;
            if (!std::isfinite(reg)) return finish(it);
        }

        auto direction = [&](const VectorXd& rc, VectorXd& dz, VectorXd& dy, VectorXd& ds) {
            VectorXd rhs = -rd - A.transpose() * (d.cwiseProduct(rp) - rc.cwiseQuotient(s));
            dz = llt.solve(rhs);
            // refine against the unregularized system; the correction keeps
            // the dual residual from flooring at reg * |dz|
            for (int k = 0; k < 2 && dz.allFinite(); ++k) {
                VectorXd r = rhs - Msys * dz;
                if (!r.allFinite()) break;
                dz += llt.solve(r);
            }
            dy = d.cwiseProduct(A * dz + rp) - rc.cwiseQuotient(s);
            ds = -rp - A * dz;
        };

        VectorXd dza, dya, dsa;
        direction(s.cwiseProduct(y), dza, dya, dsa);
        double ap = step_length(s, dsa), ad = step_length(y, dya);
        double mu_aff = (s + ap * dsa).dot(y + ad * dya) / m;
        double sigma = std::pow(std::max(mu_aff, 0.0) / mu, 3);
        sigma = std::min(std::max(sigma, 1e-8), 1.0);

        VectorXd rc = s.cwiseProduct(y) + dsa.cwiseProduct(dya) -
                      VectorXd::Constant(m, sigma * mu);
        VectorXd dz, dy, ds;
        direction(rc, dz, dy, ds);
        if (!dz.allFinite() || !dy.allFinite() || !ds.allFinite()) return finish(it);
        ap = std::min(1.0, 0.9995 * step_length(s, ds));
        ad = std::min(1.0, 0.9995 * step_length(y, dy));
        z += ap * dz;
        s += ap * ds;
        y += ad * dy;
    }

    return finish(opt.max_iterations);
}

LpSolution lp_solve_lex_min(const LpProblem& p, const LpOptions& opt) {
    LpSolution first = lp_solve(p, opt);
    if (first.status != LpStatus::optimal) return first;

    const int m = int(p.A.rows()), n = int(p.A.cols());
    const double ej = 1e-9 * (1.0 + std::abs(first.obj));
    VectorXd v = first.z, zlast = first.z;
    int iters = first.iterations;

    for (int i = 0; i < n; ++i) {
        LpProblem q;
        q.A.resize(m + 1 + 2 * i, n);
        q.b.resize(m + 1 + 2 * i);
        q.A.topRows(m) = p.A;
        q.b.head(m) = p.b;
        q.A.row(m) = p.c.transpose();
        q.b[m] = first.obj + ej;
        for (int j = 0; j < i; ++j) {
            double ez = 1e-9 * (1.0 + std::abs(v[j]));
            q.A.row(m + 1 + 2 * j).setZero();
            q.A(m + 1 + 2 * j, j) = 1.0;
            q.b[m + 1 + 2 * j] = v[j] + ez;
            q.A.row(m + 2 + 2 * j).setZero();
            q.A(m + 2 + 2 * j, j) = -1.0;
            q.b[m + 2 + 2 * j] = -v[j] + ez;
        }
        q.c = VectorXd::Zero(n);
        q.c[i] = 1.0;
        LpSolution si = lp_solve(q, opt);
        iters += si.iterations;
        if (si.status != LpStatus::optimal) {
            // pinned subproblem should stay feasible; fall back to the plain
            // optimum rather than fail
            first.iterations = iters;
            return first;
        }
        v[i] = si.z[i];
        zlast = si.z;
    }

    LpSolution out = first;
    out.z = zlast;
    out.obj = p.c.dot(zlast);
    out.iterations = iters;
    return out;
}

} // namespace gasnet
