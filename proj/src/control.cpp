#include "gasnet/control.hpp"

#include "gasnet/errors.hpp"
#include "gasnet/network.hpp"

#include <Eigen/LU>

#include <chrono>
#include <cmath>

namespace gasnet {

Policy OptimizationResult::policy() const {
    Policy p;
    p.t = t;
    p.mu = mu;
    return p;
}

Trajectory OptimizationResult::trajectory() const {
    Trajectory tr;
    tr.t = t;
    tr.x = x;
    tr.mu = mu;
    return tr;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct CostLin {
    VectorXd on_phi; // per edge
    VectorXd on_mu;  // per compressor
    double cnst = 0;
};

double flux_weight(const IncidenceSet& inc, int edge_row, bool mass_flow) {
    return mass_flow ? inc.chi[edge_row] : 1.0;
}

CostLin cost_expansion(const Dynamics& dyn, const VectorXd& phi_bar, const VectorXd& mu_bar,
                       const ControlOptions& opt) {
    const IncidenceSet& inc = dyn.base();
    const auto& comps = dyn.net().compressors;
    CostLin c;
    c.on_phi = VectorXd::Zero(inc.lay.E());
    c.on_mu = VectorXd::Zero(comps.size());
    for (size_t i = 0; i < comps.size(); ++i) {
        int k = inc.comp_row[i];
        double wgt = flux_weight(inc, k, opt.mass_flow_cost) / comps[i].efficiency;
        double me = std::pow(mu_bar[i], opt.power_exponent);
        c.on_phi[k] += wgt * (me - 1.0);
        c.on_mu[i] = wgt * phi_bar[k] * opt.power_exponent * me / mu_bar[i];
        c.cnst -= c.on_mu[i] * mu_bar[i];
    }
    return c;
}

double box_violation(const Dynamics& dyn, const State& x, double slack) {
    const Limits& lim = dyn.net().lim;
    const double width = lim.rho_max - lim.rho_min;
    double v = 0;
    for (int i = 0; i < x.rho.size(); ++i) {
        v = std::max(v, (lim.rho_min - x.rho[i]) / width);
        v = std::max(v, (x.rho[i] - lim.rho_max) / width);
    }
    for (int k = 0; k < x.phi.size(); ++k) {
        double den = std::isfinite(lim.phi_max) ? (lim.phi_max - lim.phi_min)
                                                : 1.0 + std::abs(x.phi[k]);
        v = std::max(v, (lim.phi_min - x.phi[k]) / den);
        if (std::isfinite(lim.phi_max)) v = std::max(v, (x.phi[k] - lim.phi_max) / den);
    }
    return std::max(v - slack, 0.0);
}

// linear_rhs is affine in mu; its columns do not depend on the boundary data
MatrixXd input_columns(const Dynamics& dyn, const LinearModel& model) {
    const int C = int(model.nom.mu.size());
    const State xz{VectorXd::Zero(model.Vw), VectorXd::Zero(model.E)};
    const VectorXd w0 = VectorXd::Zero(model.Vw);
    VectorXd base = linear_rhs(dyn, model, xz, VectorXd::Ones(C), model.nom.s, w0);
    MatrixXd B(model.dim(), C);
    for (int c = 0; c < C; ++c) {
        VectorXd m1 = VectorXd::Ones(C);
        m1[c] += 1.0;
        B.col(c) = linear_rhs(dyn, model, xz, m1, model.nom.s, w0) - base;
    }
    return B;
}

VectorXd input_offset(const Dynamics& dyn, const LinearModel& model, const MatrixXd& Bmu,
                      const VectorXd& s, const VectorXd& w) {
    const int C = int(Bmu.cols());
    const State xz{VectorXd::Zero(model.Vw), VectorXd::Zero(model.E)};
    VectorXd base = linear_rhs(dyn, model, xz, VectorXd::Ones(C), s, w);
    return base - Bmu * VectorXd::Ones(C);
}

struct LpBuilder {
    int n;
    std::vector<Eigen::RowVectorXd> A;
    std::vector<double> b;
    std::vector<std::string> nm;
    std::vector<char> el;

    explicit LpBuilder(int vars) : n(vars) {}

    void add(Eigen::RowVectorXd row, double rhs, std::string name, bool elastic) {
        A.push_back(std::move(row));
        b.push_back(rhs);
        nm.push_back(std::move(name));
        el.push_back(elastic ? 1 : 0);
    }

    LpProblem problem(const VectorXd& c) const {
        LpProblem p;
        p.A.resize(int(A.size()), n);
        p.b.resize(int(A.size()));
        for (size_t i = 0; i < A.size(); ++i) {
            p.A.row(int(i)) = A[i];
            p.b[int(i)] = b[i];
        }
        p.c = c;
        p.row_name = nm;
        return p;
    }
};

// State box rows for one affine state x = x0 + S * vars; the column block of
// S occupied by the variables is handled by the caller via full-width rows.
void add_state_rows(LpBuilder& lb, const Dynamics& dyn, const VectorXd& x0, const MatrixXd& S,
                    const std::string& tag) {
    const Layout& lay = dyn.lay();
    const Limits& lim = dyn.net().lim;
    const int Vw = int(lay.Vw()), E = int(lay.E());
    for (int i = 0; i < Vw; ++i) {
        std::string node = "node " + std::to_string(lay.withdrawal_ids[i]);
        lb.add(S.row(i), lim.rho_max - x0[i], "density cap, " + node + tag, true);
        lb.add(-S.row(i), x0[i] - lim.rho_min, "density floor, " + node + tag, true);
    }
    for (int k = 0; k < E; ++k) {
        std::string edge = "edge " + std::to_string(lay.edge_ids[k]);
        lb.add(-S.row(Vw + k), x0[Vw + k] - lim.phi_min, "flux floor, " + edge + tag, true);
        if (std::isfinite(lim.phi_max))
            lb.add(S.row(Vw + k), lim.phi_max - x0[Vw + k], "flux cap, " + edge + tag, true);
    }
}

void add_ratio_rows(LpBuilder& lb, const Dynamics& dyn, int block, const std::string& tag) {
    const auto& comps = dyn.net().compressors;
    const int C = int(comps.size());
    for (int c = 0; c < C; ++c) {
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(lb.n);
        std::string name = "compressor on edge " + std::to_string(comps[c].edge);
        row[block * C + c] = 1.0;
        lb.add(row, comps[c].max_ratio, "ratio cap, " + name + tag, false);
        row[block * C + c] = -1.0;
        lb.add(row, -1.0, "ratio floor, " + name + tag, false);
    }
}

// successive-linearization trust region around the current ratio schedule
void add_trust_rows(LpBuilder& lb, const VectorXd& mu_ref, int block, double radius) {
    const int C = int(mu_ref.size());
    for (int c = 0; c < C; ++c) {
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(lb.n);
        row[block * C + c] = 1.0;
        lb.add(row, mu_ref[c] + radius, "trust cap", false);
        row[block * C + c] = -1.0;
        lb.add(row, -mu_ref[c] + radius, "trust floor", false);
    }
}

// Minimal uniform slack on the elastic rows. Empty result: feasible (rows
// relaxed in place by the slack found); otherwise an infeasibility
// certificate naming the worst row.
std::string make_feasible(LpBuilder& lb, const LpOptions& lo, long& iters) {
    bool any = false;
    for (char e : lb.el) any = any || e;
    if (!any) return "";

    LpProblem q;
    const int m = int(lb.A.size());
    q.A = MatrixXd::Zero(m + 1, lb.n + 1);
    q.b.resize(m + 1);
    for (int i = 0; i < m; ++i) {
        q.A.block(i, 0, 1, lb.n) = lb.A[i];
        q.A(i, lb.n) = lb.el[i] ? -1.0 : 0.0;
        q.b[i] = lb.b[i];
    }
    q.A(m, lb.n) = -1.0;
    q.b[m] = 0.0;
    q.c = VectorXd::Zero(lb.n + 1);
    q.c[lb.n] = 1.0;

    LpSolution sol = lp_solve(q, lo);
    iters += sol.iterations;
    if (sol.status != LpStatus::optimal)
        return "feasibility subproblem did not converge";

    double scale = 0;
    for (int i = 0; i < m; ++i)
        if (lb.el[i]) scale = std::max(scale, std::abs(lb.b[i]));
    double t = sol.z[lb.n];
    if (t > 1e-7 * (1.0 + scale)) {
        VectorXd z = sol.z.head(lb.n);
        double worst = -1;
        int wi = 0;
        for (int i = 0; i < m; ++i) {
            if (!lb.el[i]) continue;
            double viol = lb.A[i].dot(z) - lb.b[i];
            if (viol > worst) {
                worst = viol;
                wi = i;
            }
        }
        return lb.nm[wi] + " cannot be met (short by " + std::to_string(worst) + ")";
    }
    for (int i = 0; i < m; ++i)
        if (lb.el[i]) lb.b[i] += std::max(t, 0.0) + 1e-9 * (1.0 + std::abs(lb.b[i]));
    return "";
}

void require_control_ready(const Dynamics& dyn, const ControlOptions& opt) {
    if (!dyn.inertia()) throw domain_error("control requires the inertial dynamics");
    if (!(opt.dt > 0)) throw domain_error("control interval must be positive");
    if (!(opt.power_exponent > 0)) throw domain_error("power exponent must be positive");
}

// solver iterates can land a hair outside the ratio box; project before the
// dynamics see them
VectorXd clamp_ratios(const Dynamics& dyn, VectorXd mu) {
    const auto& comps = dyn.net().compressors;
    for (size_t i = 0; i < comps.size(); ++i)
        mu[i] = std::min(std::max(mu[i], 1.0), comps[i].max_ratio);
    return mu;
}

} // namespace

double stage_cost(const Dynamics& dyn, const State& x, const VectorXd& mu,
                  const ControlOptions& opt) {
    const IncidenceSet& inc = dyn.base();
    const auto& comps = dyn.net().compressors;
    if (mu.size() != Eigen::Index(comps.size()))
        throw domain_error("stage_cost: one ratio per compressor expected");
    double J = 0;
    for (size_t i = 0; i < comps.size(); ++i) {
        int k = inc.comp_row[i];
        double wgt = flux_weight(inc, k, opt.mass_flow_cost) / comps[i].efficiency;
        J += wgt * x.phi[k] * (std::pow(mu[i], opt.power_exponent) - 1.0);
    }
    return J;
}

double linearized_stage_cost(const Dynamics& dyn, const VectorXd& phi_bar,
                             const VectorXd& mu_bar, const State& x, const VectorXd& mu,
                             const ControlOptions& opt) {
    CostLin c = cost_expansion(dyn, phi_bar, mu_bar, opt);
    return c.on_phi.dot(x.phi) + c.on_mu.dot(mu) + c.cnst;
}

std::pair<VectorXd, State> steady_optimal(const Dynamics& dyn, const VectorXd& s,
                                          const VectorXd& w, const ControlOptions& opt) {
    require_control_ready(dyn, opt);
    const int C = int(dyn.net().compressors.size());
    VectorXd mu = VectorXd::Ones(C);
    State x = dyn.steady_state(mu, s, w);
    long iters = 0;

    for (int it = 0; it < opt.max_outer; ++it) {
        LinearModel model = relinearize(dyn, x, mu, s, w);
        MatrixXd Bmu = input_columns(dyn, model);
        VectorXd off = input_offset(dyn, model, Bmu, s, w);
        Eigen::PartialPivLU<MatrixXd> alu(model.A);
        VectorXd x0 = -alu.solve(off);
        MatrixXd S = -alu.solve(Bmu);

        LpBuilder lb(C);
        add_state_rows(lb, dyn, x0, S, ", steady");
        add_ratio_rows(lb, dyn, 0, ", steady");
        std::string cert = make_feasible(lb, opt.lp, iters);
        if (!cert.empty()) throw solver_error("no feasible steady operation: " + cert);

        CostLin cl = cost_expansion(dyn, x.phi, mu, opt);
        VectorXd c = S.bottomRows(x.phi.size()).transpose() * cl.on_phi + cl.on_mu;
        LpSolution sol = lp_solve_lex_min(lb.problem(c), opt.lp);
        iters += sol.iterations;
        if (sol.status == LpStatus::infeasible)
            throw solver_error("no feasible steady operation: " + sol.certificate);

        VectorXd dmu = clamp_ratios(dyn, sol.z) - mu;
        double lambda = 1.0;
        for (;;) {
            VectorXd mt = mu + lambda * dmu;
            try {
                State xn = dyn.steady_state(mt, s, w, &x);
                mu = mt;
                x = xn;
                break;
            } catch (const solver_error&) {
                lambda *= 0.5;
                if (lambda < 1e-3) throw;
            }
        }
        if (dmu.lpNorm<Eigen::Infinity>() <= opt.outer_tol * (1.0 + mu.lpNorm<Eigen::Infinity>()))
            return {mu, x};
    }
    return {mu, x};
}

namespace {

struct SegmentOut {
    VectorXd mu;
    State x;
    RunStatus status = RunStatus::optimal;
    std::string msg;
    long iters = 0;
};

// One receding-horizon segment against the nonlinear step: linearize, solve,
// trust-region step toward the LP answer until the ratio update is stationary.
SegmentOut sqp_segment(const Dynamics& dyn, const State& xp, const VectorXd& mup, double dt,
                       const VectorXd& s, const VectorXd& w, const ControlOptions& opt) {
    SegmentOut out;
    const int C = int(mup.size());
    VectorXd mu = mup;
    State x = dyn.step_implicit(xp, dt, mu, s, w);
    const double pen = 1e3 * (1.0 + std::abs(stage_cost(dyn, x, mu, opt)));
    auto merit = [&](const State& xx, const VectorXd& mm) {
        return stage_cost(dyn, xx, mm, opt) + pen * box_violation(dyn, xx, 0.0);
    };
    double mer = merit(x, mu);
    double radius = 0.1;

    auto done = [&](const LpProblem* prob, const VectorXd* zc) {
        // lexicographic polish of the final program breaks vertex ties the
        // same way in every mode
        if (prob) {
            LpSolution lex = lp_solve_lex_min(*prob, opt.lp);
            out.iters += lex.iterations;
            VectorXd muf = clamp_ratios(dyn, lex.status == LpStatus::optimal ? lex.z : *zc);
            try {
                out.x = dyn.step_implicit(xp, dt, muf, s, w);
                out.mu = muf;
                out.status = RunStatus::optimal;
                return out;
            } catch (const solver_error&) {
            }
        }
        out.x = x;
        out.mu = mu;
        out.status = RunStatus::optimal;
        return out;
    };

    for (int it = 0; it < opt.max_outer; ++it) {
        LinearModel model = relinearize(dyn, x, mu, s, w);
        MatrixXd Bmu = input_columns(dyn, model);
        VectorXd off = input_offset(dyn, model, Bmu, s, w);
        MatrixXd W = MatrixXd::Identity(model.dim(), model.dim()) - dt * model.A;
        Eigen::PartialPivLU<MatrixXd> wlu(W);
        VectorXd x0 = wlu.solve(model.stack(xp) + dt * off);
        MatrixXd S = dt * wlu.solve(Bmu);

        LpBuilder lb(C);
        add_state_rows(lb, dyn, x0, S, "");
        add_ratio_rows(lb, dyn, 0, "");
        add_trust_rows(lb, mu, 0, radius);
        std::string cert = make_feasible(lb, opt.lp, out.iters);
        if (!cert.empty()) {
            out.status = RunStatus::infeasible;
            out.msg = cert;
            out.mu = mu;
            out.x = x;
            return out;
        }

        CostLin cl = cost_expansion(dyn, x.phi, mu, opt);
        VectorXd c = S.bottomRows(x.phi.size()).transpose() * cl.on_phi + cl.on_mu;
        LpProblem prob = lb.problem(c);
        LpSolution sol = lp_solve(prob, opt.lp);
        out.iters += sol.iterations;
        if (sol.status == LpStatus::infeasible) {
            out.status = RunStatus::infeasible;
            out.msg = sol.certificate;
            out.mu = mu;
            out.x = x;
            return out;
        }
        if (sol.status != LpStatus::optimal) {
            // a stalled subproblem at a tiny radius is just a failed step
            radius *= 0.5;
            if (radius <= opt.outer_tol) return done(nullptr, nullptr);
            continue;
        }

        VectorXd zc = clamp_ratios(dyn, sol.z);
        VectorXd dmu = zc - mu;
        double dmax = dmu.lpNorm<Eigen::Infinity>();
        double pred = -c.dot(dmu);
        if (dmax <= opt.outer_tol * (1.0 + mu.lpNorm<Eigen::Infinity>()))
            return done(&prob, &zc);

        bool ok = false;
        State xt;
        double mtt = 0;
        try {
            xt = dyn.step_implicit(xp, dt, zc, s, w);
            mtt = merit(xt, zc);
            ok = true;
        } catch (const solver_error&) {
        }
        if (ok && mtt <= mer - std::max(1e-4 * pred, 1e-12 * (1.0 + std::abs(mer)))) {
            mu = zc;
            x = xt;
            mer = mtt;
            if (dmax >= 0.9 * radius) radius = std::min(2.0 * radius, 1.0);
        } else {
            radius *= 0.5;
            // the linear model stopped predicting the step; the point is as
            // stationary as this model can certify
            if (radius <= opt.outer_tol) return done(nullptr, nullptr);
        }
    }
    out.status = RunStatus::iteration_limit;
    out.msg = "segment iteration limit";
    out.mu = mu;
    out.x = x;
    return out;
}

void merge_status(OptimizationResult& res, RunStatus s, const std::string& msg) {
    if (s == RunStatus::optimal) return;
    if (res.status == RunStatus::optimal || s == RunStatus::infeasible) {
        res.status = s;
        res.message = msg;
    }
}

} // namespace

OptimizationResult run_mpc(const Dynamics& dyn, const BoundaryScenario& scn,
                           const ControlOptions& opt) {
    require_control_ready(dyn, opt);
    BoundarySampler bs(dyn.net(), scn);
    const int M = int(std::floor(bs.horizon() / opt.dt + 1e-9));
    if (M < 1) throw domain_error("horizon shorter than one control interval");

    const VectorXd s0 = bs.supply(0.0), w0 = bs.withdrawal(0.0);
    auto [mu0, x0] = steady_optimal(dyn, s0, w0, opt);

    OptimizationResult res;
    res.t.push_back(0.0);
    res.x.push_back(x0);
    res.mu.push_back(mu0);

    const auto t_start = Clock::now();
    State xp = x0;
    VectorXd mup = mu0;

    LinearModel model;
    MatrixXd Bmu;
    if (!opt.nonlinear && !opt.relinearize) {
        model = relinearize(dyn, x0, mu0, s0, w0);
        Bmu = input_columns(dyn, model);
    }

    for (int m = 1; m <= M; ++m) {
        const double tm = m * opt.dt;
        const VectorXd s = bs.supply(tm), w = bs.withdrawal(tm);
        std::string tag = ", t=" + std::to_string(int(tm)) + "s";

        if (opt.nonlinear) {
            SegmentOut seg = sqp_segment(dyn, xp, mup, opt.dt, s, w, opt);
            res.lp_iterations += seg.iters;
            merge_status(res, seg.status, seg.msg);
            if (seg.status == RunStatus::infeasible) break;
            xp = seg.x;
            mup = seg.mu;
            res.t.push_back(tm);
            res.x.push_back(xp);
            res.mu.push_back(mup);
            res.stage.push_back(stage_cost(dyn, xp, mup, opt));
            continue;
        }

        if (opt.relinearize) {
            model = relinearize(dyn, xp, mup, s, w);
            Bmu = input_columns(dyn, model);
        }
        VectorXd off = input_offset(dyn, model, Bmu, s, w);
        MatrixXd W = MatrixXd::Identity(model.dim(), model.dim()) - opt.dt * model.A;
        Eigen::PartialPivLU<MatrixXd> wlu(W);
        VectorXd xoff = wlu.solve(model.stack(xp) + opt.dt * off);
        MatrixXd S = opt.dt * wlu.solve(Bmu);

        LpBuilder lb(int(mup.size()));
        add_state_rows(lb, dyn, xoff, S, tag);
        add_ratio_rows(lb, dyn, 0, tag);
        std::string cert = make_feasible(lb, opt.lp, res.lp_iterations);
        if (!cert.empty()) {
            merge_status(res, RunStatus::infeasible, cert);
            break;
        }

        CostLin cl = cost_expansion(dyn, model.nom.x.phi, model.nom.mu, opt);
        VectorXd c = S.bottomRows(model.E).transpose() * cl.on_phi + cl.on_mu;
        LpSolution sol = lp_solve_lex_min(lb.problem(c), opt.lp);
        res.lp_iterations += sol.iterations;
        if (sol.status == LpStatus::infeasible) {
            merge_status(res, RunStatus::infeasible, sol.certificate);
            break;
        }
        if (sol.status != LpStatus::optimal) {
            merge_status(res, RunStatus::iteration_limit, "ratio program did not converge" + tag);
            break;
        }

        VectorXd xv = xoff + S * sol.z;
        xp = model.unstack(xv);
        mup = clamp_ratios(dyn, sol.z);
        res.t.push_back(tm);
        res.x.push_back(xp);
        res.mu.push_back(mup);
        res.stage.push_back(cl.on_phi.dot(xp.phi) + cl.on_mu.dot(mup) + cl.cnst);
    }

    res.wall_s = seconds_since(t_start);
    for (double v : res.stage) res.objective += v;
    return res;
}

OptimizationResult run_oc(const Dynamics& dyn, const BoundaryScenario& scn,
                          const ControlOptions& opt) {
    require_control_ready(dyn, opt);
    BoundarySampler bs(dyn.net(), scn);
    const int M = int(std::floor(bs.horizon() / opt.dt + 1e-9));
    if (M < 1) throw domain_error("horizon shorter than one control interval");
    const int C = int(dyn.net().compressors.size());
    const int nx = int(dyn.lay().Vw() + dyn.lay().E());

    const VectorXd s0 = bs.supply(0.0), w0 = bs.withdrawal(0.0);
    auto [mu0, x0] = steady_optimal(dyn, s0, w0, opt);

    OptimizationResult res;
    res.t.push_back(0.0);
    res.x.push_back(x0);
    res.mu.push_back(mu0);

    const auto t_start = Clock::now();

    std::vector<VectorXd> svec(M + 1), wvec(M + 1);
    for (int m = 1; m <= M; ++m) {
        svec[m] = bs.supply(m * opt.dt);
        wvec[m] = bs.withdrawal(m * opt.dt);
    }

    // chained sensitivities of every sample to every ratio block
    std::vector<VectorXd> base(M + 1);
    std::vector<std::vector<MatrixXd>> S(M + 1);
    auto chain = [&](const std::vector<LinearModel>& models,
                     const std::vector<MatrixXd>& Bmus) {
        base[0] = models[1].stack(x0);
        for (int m = 1; m <= M; ++m) {
            const LinearModel& md = models[m];
            VectorXd off = input_offset(dyn, md, Bmus[m], svec[m], wvec[m]);
            MatrixXd W = MatrixXd::Identity(nx, nx) - opt.dt * md.A;
            Eigen::PartialPivLU<MatrixXd> wlu(W);
            base[m] = wlu.solve(base[m - 1] + opt.dt * off);
            S[m].assign(m + 1, MatrixXd());
            S[m][m] = opt.dt * wlu.solve(Bmus[m]);
            for (int i = 1; i < m; ++i) S[m][i] = wlu.solve(S[m - 1][i]);
        }
    };

    auto build_lp = [&](const std::vector<CostLin>& cls, LpBuilder& lb, VectorXd& c,
                        double& cconst) {
        c = VectorXd::Zero(M * C);
        cconst = 0;
        for (int m = 1; m <= M; ++m) {
            MatrixXd Sm(nx, M * C);
            Sm.setZero();
            for (int i = 1; i <= m; ++i) Sm.middleCols((i - 1) * C, C) = S[m][i];
            std::string tag = ", t=" + std::to_string(int(m * opt.dt)) + "s";
            add_state_rows(lb, dyn, base[m], Sm, tag);
            add_ratio_rows(lb, dyn, m - 1, tag);
            for (int i = 1; i <= m; ++i)
                c.segment((i - 1) * C, C) +=
                    S[m][i].bottomRows(dyn.lay().E()).transpose() * cls[m].on_phi;
            c.segment((m - 1) * C, C) += cls[m].on_mu;
            cconst += cls[m].on_phi.dot(base[m].tail(dyn.lay().E())) + cls[m].cnst;
        }
    };

    auto states_for = [&](const VectorXd& z) {
        std::vector<State> xs(M + 1);
        xs[0] = x0;
        for (int m = 1; m <= M; ++m) {
            VectorXd xv = base[m];
            for (int i = 1; i <= m; ++i) xv += S[m][i] * z.segment((i - 1) * C, C);
            xs[m] = State{xv.head(dyn.lay().Vw()), xv.tail(dyn.lay().E())};
        }
        return xs;
    };

    if (!opt.nonlinear) {
        LinearModel model = relinearize(dyn, x0, mu0, s0, w0);
        MatrixXd Bmu = input_columns(dyn, model);
        std::vector<LinearModel> models(M + 1, model);
        std::vector<MatrixXd> Bmus(M + 1, Bmu);
        chain(models, Bmus);

        CostLin cl = cost_expansion(dyn, x0.phi, mu0, opt);
        std::vector<CostLin> cls(M + 1, cl);
        LpBuilder lb(M * C);
        VectorXd c;
        double cconst = 0;
        build_lp(cls, lb, c, cconst);

        std::string cert = make_feasible(lb, opt.lp, res.lp_iterations);
        if (!cert.empty()) {
            merge_status(res, RunStatus::infeasible, cert);
            res.wall_s = seconds_since(t_start);
            return res;
        }
        LpSolution sol = lp_solve_lex_min(lb.problem(c), opt.lp);
        res.lp_iterations += sol.iterations;
        if (sol.status == LpStatus::infeasible) {
            merge_status(res, RunStatus::infeasible, sol.certificate);
            res.wall_s = seconds_since(t_start);
            return res;
        }
        if (sol.status != LpStatus::optimal) {
            merge_status(res, RunStatus::iteration_limit, "ratio program did not converge");
            res.wall_s = seconds_since(t_start);
            return res;
        }

        std::vector<State> xs = states_for(sol.z);
        for (int m = 1; m <= M; ++m) {
            VectorXd mum = clamp_ratios(dyn, sol.z.segment((m - 1) * C, C));
            res.t.push_back(m * opt.dt);
            res.x.push_back(xs[m]);
            res.mu.push_back(mum);
            res.stage.push_back(cl.on_phi.dot(xs[m].phi) + cl.on_mu.dot(mum) + cl.cnst);
        }
        res.wall_s = seconds_since(t_start);
        for (double v : res.stage) res.objective += v;
        return res;
    }

    // nonlinear mode: iterate the whole-horizon program against nonlinear
    // rollouts of the candidate ratio schedule
    std::vector<VectorXd> mus(M + 1, mu0);
    auto rollout = [&](const std::vector<VectorXd>& mm, std::vector<State>& xs) {
        xs.assign(M + 1, State{});
        xs[0] = x0;
        for (int m = 1; m <= M; ++m)
            xs[m] = dyn.step_implicit(xs[m - 1], opt.dt, mm[m], svec[m], wvec[m]);
    };
    std::vector<State> xs;
    rollout(mus, xs);

    double j0 = 0;
    for (int m = 1; m <= M; ++m) j0 += stage_cost(dyn, xs[m], mus[m], opt);
    const double pen = 1e3 * (1.0 + std::abs(j0));
    auto merit = [&](const std::vector<State>& xv, const std::vector<VectorXd>& mm) {
        double v = 0;
        for (int m = 1; m <= M; ++m)
            v += stage_cost(dyn, xv[m], mm[m], opt) + pen * box_violation(dyn, xv[m], 1e-5);
        return v;
    };
    double mer = merit(xs, mus);
    double radius = 0.1;

    RunStatus st = RunStatus::iteration_limit;
    std::string msg = "horizon iteration limit";
    for (int it = 0; it < opt.max_outer; ++it) {
        std::vector<LinearModel> models(M + 1);
        std::vector<MatrixXd> Bmus(M + 1);
        std::vector<CostLin> cls(M + 1);
        for (int m = 1; m <= M; ++m) {
            models[m] = relinearize(dyn, xs[m], mus[m], svec[m], wvec[m]);
            Bmus[m] = input_columns(dyn, models[m]);
            cls[m] = cost_expansion(dyn, xs[m].phi, mus[m], opt);
        }
        chain(models, Bmus);

        LpBuilder lb(M * C);
        VectorXd c;
        double cconst = 0;
        build_lp(cls, lb, c, cconst);
        for (int m = 1; m <= M; ++m) add_trust_rows(lb, mus[m], m - 1, radius);
        std::string cert = make_feasible(lb, opt.lp, res.lp_iterations);
        if (!cert.empty()) {
            st = RunStatus::infeasible;
            msg = cert;
            break;
        }
        LpProblem prob = lb.problem(c);
        LpSolution sol = lp_solve(prob, opt.lp);
        res.lp_iterations += sol.iterations;
        if (sol.status == LpStatus::infeasible) {
            st = RunStatus::infeasible;
            msg = sol.certificate;
            break;
        }
        if (sol.status != LpStatus::optimal) {
            // a stalled subproblem at a tiny radius is just a failed step
            radius *= 0.5;
            if (radius <= opt.outer_tol) {
                st = RunStatus::optimal;
                msg.clear();
                break;
            }
            continue;
        }

        std::vector<VectorXd> zc(M + 1, mu0);
        VectorXd dstack = VectorXd::Zero(M * C);
        double dmax = 0;
        for (int m = 1; m <= M; ++m) {
            zc[m] = clamp_ratios(dyn, sol.z.segment((m - 1) * C, C));
            dstack.segment((m - 1) * C, C) = zc[m] - mus[m];
            dmax = std::max(dmax, (zc[m] - mus[m]).lpNorm<Eigen::Infinity>());
        }
        double pred = -c.dot(dstack);

        if (dmax <= opt.outer_tol * 2.0) {
            LpSolution lex = lp_solve_lex_min(prob, opt.lp);
            res.lp_iterations += lex.iterations;
            const VectorXd& zf = lex.status == LpStatus::optimal ? lex.z : sol.z;
            std::vector<VectorXd> muf(M + 1, mu0);
            for (int m = 1; m <= M; ++m)
                muf[m] = clamp_ratios(dyn, zf.segment((m - 1) * C, C));
            try {
                rollout(muf, xs);
                mus = muf;
            } catch (const solver_error&) {
                rollout(mus, xs);
            }
            st = RunStatus::optimal;
            msg.clear();
            break;
        }

        bool ok = false;
        std::vector<State> xt;
        double mtt = 0;
        try {
            rollout(zc, xt);
            mtt = merit(xt, zc);
            ok = true;
        } catch (const solver_error&) {
        }
        if (ok && mtt <= mer - std::max(1e-4 * pred, 1e-12 * (1.0 + std::abs(mer)))) {
            mus = zc;
            xs = xt;
            mer = mtt;
            if (dmax >= 0.9 * radius) radius = std::min(2.0 * radius, 1.0);
        } else {
            radius *= 0.5;
            if (radius <= opt.outer_tol) {
                // model no longer certifies descent; current schedule is the
                // converged answer
                st = RunStatus::optimal;
                msg.clear();
                break;
            }
        }
    }

    merge_status(res, st, msg);
    for (int m = 1; m <= M; ++m) {
        res.t.push_back(m * opt.dt);
        res.x.push_back(xs[m]);
        res.mu.push_back(mus[m]);
        res.stage.push_back(stage_cost(dyn, xs[m], mus[m], opt));
    }
    res.wall_s = seconds_since(t_start);
    for (double v : res.stage) res.objective += v;
    return res;
}

double feasibility_gap(const Dynamics& dyn, const BoundaryScenario& scn, const Policy& pol,
                       double dt_s) {
    Trajectory tr = dyn.simulate(scn, pol, dt_s);
    double v = 0;
    for (const State& x : tr.x) v = std::max(v, box_violation(dyn, x, 0.0));
    return v;
}

} // namespace gasnet
