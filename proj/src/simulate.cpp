#include "gasnet/simulate.hpp"

#include "gasnet/errors.hpp"

#include <Eigen/SparseLU>

#include <cmath>

namespace gasnet {

namespace {

double sign_sq(double x) { return x * std::abs(x); }

void check_boundary(const Layout& lay, const VectorXd& s, const VectorXd& w) {
    if (s.size() != lay.Vs())
        throw domain_error("supply vector has " + std::to_string(s.size()) + " entries, network has " +
                           std::to_string(lay.Vs()) + " supply nodes");
    if (w.size() != lay.Vw())
        throw domain_error("withdrawal vector has " + std::to_string(w.size()) +
                           " entries, network has " + std::to_string(lay.Vw()) +
                           " withdrawal nodes");
}

void check_state(const Layout& lay, const State& x) {
    if (x.rho.size() != lay.Vw() || x.phi.size() != lay.E())
        throw domain_error("state dimensions do not match the network");
}

} // namespace

Dynamics::Dynamics(RefinedNetwork rn, bool inertia)
    : rn_(std::move(rn)),
      base_(assemble(rn_, VectorXd::Ones(int(rn_.net.compressors.size())))),
      inertia_(inertia) {}

VectorXd Dynamics::outlet_density(const IncidenceSet& inc, const VectorXd& rho) const {
    VectorXd out = inc.Ql * rho;
    for (int k = 0; k < out.size(); ++k)
        if (!(out[k] > 0))
            throw domain_error("nonpositive density at outlet of edge " +
                               std::to_string(inc.lay.edge_ids[k]));
    return out;
}

State Dynamics::rhs(const State& x, const VectorXd& mu, const VectorXd& s, const VectorXd& w) const {
    IncidenceSet inc = at(mu);
    check_boundary(inc.lay, s, w);
    check_state(inc.lay, x);
    const double sig2 = sigma() * sigma();
    VectorXd rho_out = outlet_density(inc, x.rho);

    State d;
    d.rho = (inc.Q.transpose() * (inc.chi.asDiagonal() * x.phi) - w).cwiseQuotient(inc.Lambda);
    VectorXd grad = inc.M * x.rho + inc.N * s;
    d.phi.resize(inc.lay.E());
    for (int k = 0; k < d.phi.size(); ++k)
        d.phi[k] = -sig2 / inc.ell[k] * grad[k] - inc.K[k] * sign_sq(x.phi[k]) / rho_out[k];
    return d;
}

void Dynamics::friction_jacobian(const IncidenceSet& inc, const State& x,
                                 VectorXd& alpha, VectorXd& beta) const {
    VectorXd rho_out = outlet_density(inc, x.rho);
    alpha.resize(inc.lay.E());
    beta.resize(inc.lay.E());
    for (int k = 0; k < alpha.size(); ++k) {
        alpha[k] = inc.K[k] * sign_sq(x.phi[k]) / (rho_out[k] * rho_out[k]);
        beta[k] = 2.0 * inc.K[k] * std::abs(x.phi[k]) / rho_out[k];
    }
}

namespace {

// Shared pieces for the steady and stepping Newton systems over z = [rho; phi].
struct Blocks {
    const IncidenceSet& inc;
    double sig2;
    int Vw, E;

    Blocks(const IncidenceSet& i, double s2) : inc(i), sig2(s2), Vw(i.lay.Vw()), E(i.lay.E()) {}

    bool admissible(const VectorXd& z) const {
        if (!(z.head(Vw).array() > 0).all()) return false;
        VectorXd out = inc.Ql * z.head(Vw);
        return (out.array() > 0).all();
    }

    // mass = Q'X phi - w (per withdrawal node, kg/s)
    // flux = sigma^2 L^-1 (M rho + N s) + K phi|phi|/(Ql rho) (per edge, = -phi_dot)
    // Scales are the largest constituent magnitudes, for relative residuals.
    void terms(const VectorXd& z, const VectorXd& s, const VectorXd& w,
               VectorXd& mass, VectorXd& flux, double& mass_scale, double& flux_scale) const {
        VectorXd rho = z.head(Vw), phi = z.tail(E);
        VectorXd inflow = inc.Q.transpose() * (inc.chi.asDiagonal() * phi);
        mass = inflow - w;
        VectorXd grad = inc.M * rho + inc.N * s;
        VectorXd rho_out = inc.Ql * rho;
        flux.resize(E);
        double fs = 0, ms = 0;
        for (int k = 0; k < E; ++k) {
            double a = sig2 / inc.ell[k] * grad[k];
            double b = inc.K[k] * sign_sq(phi[k]) / rho_out[k];
            flux[k] = a + b;
            fs = std::max(fs, std::abs(a) + std::abs(b));
        }
        for (int j = 0; j < Vw; ++j) ms = std::max(ms, std::abs(inflow[j]) + std::abs(w[j]));
        mass_scale = 1.0 + ms;
        flux_scale = 1.0 + fs;
    }

    // Raw derivatives of (mass, flux) w.r.t. z, rows 0..Vw-1 mass, Vw.. flux.
    void term_jacobian(const VectorXd& z, std::vector<Eigen::Triplet<double>>& t) const {
        VectorXd rho = z.head(Vw), phi = z.tail(E);
        VectorXd rho_out = inc.Ql * rho;
        for (int k = 0; k < E; ++k) {
            for (SpMat::InnerIterator it(inc.Q, k); it; ++it)
                t.emplace_back(int(it.col()), Vw + k, it.value() * inc.chi[k]);
            double alpha = inc.K[k] * sign_sq(phi[k]) / (rho_out[k] * rho_out[k]);
            double beta = 2.0 * inc.K[k] * std::abs(phi[k]) / rho_out[k];
            for (SpMat::InnerIterator it(inc.M, k); it; ++it)
                t.emplace_back(Vw + k, int(it.col()), sig2 / inc.ell[k] * it.value());
            for (SpMat::InnerIterator it(inc.Ql, k); it; ++it)
                t.emplace_back(Vw + k, int(it.col()), -alpha * it.value());
            t.emplace_back(Vw + k, Vw + k, beta);
        }
    }
};

struct NewtonProblem {
    virtual double residual(const VectorXd& z, VectorXd& F) const = 0;
    virtual void jacobian(const VectorXd& z, SpMat& J) const = 0;
    virtual bool admissible(const VectorXd& z) const = 0;
    virtual ~NewtonProblem() = default;
};

VectorXd newton_solve(const NewtonProblem& prob, VectorXd z, double tol, const char* what) {
    VectorXd F;
    double res = prob.residual(z, F);
    SpMat J;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    for (int it = 0; it < 50; ++it) {
        if (res <= tol) return z;
        prob.jacobian(z, J);
        Eigen::SparseMatrix<double> Jc = J;
        lu.compute(Jc);
        if (lu.info() != Eigen::Success) {
            // flat iterates (all-zero flux) can make rows dependent; nudge once
            Eigen::SparseMatrix<double> R(J.rows(), J.cols());
            R.setIdentity();
            Jc = Jc + 1e-8 * R;
            lu.compute(Jc);
            if (lu.info() != Eigen::Success)
                throw solver_error(std::string(what) + ": singular Jacobian");
        }
        VectorXd dz = lu.solve(-F);
        double lambda = 1.0;
        for (;;) {
            VectorXd zn = z + lambda * dz;
            if (prob.admissible(zn)) {
                VectorXd Fn;
                double rn = prob.residual(zn, Fn);
                if (rn < res || rn <= tol) {
                    z = zn;
                    F = Fn;
                    res = rn;
                    break;
                }
            }
            lambda *= 0.5;
            if (lambda < 1e-7)
                throw solver_error(std::string(what) + ": line search stalled, residual " +
                                   std::to_string(res));
        }
    }
    if (res <= tol) return z;
    throw solver_error(std::string(what) + ": no convergence in 50 iterations, residual " +
                       std::to_string(res));
}

struct SteadyProblem : NewtonProblem {
    const Blocks& b;
    const VectorXd &s, &w;
    SteadyProblem(const Blocks& bb, const VectorXd& ss, const VectorXd& ww) : b(bb), s(ss), w(ww) {}

    double residual(const VectorXd& z, VectorXd& F) const override {
        VectorXd mass, flux;
        double ms, fs;
        b.terms(z, s, w, mass, flux, ms, fs);
        F.resize(b.Vw + b.E);
        F.head(b.Vw) = mass;
        F.tail(b.E) = flux;
        return std::max(mass.lpNorm<Eigen::Infinity>() / ms, flux.lpNorm<Eigen::Infinity>() / fs);
    }

    void jacobian(const VectorXd& z, SpMat& J) const override {
        std::vector<Eigen::Triplet<double>> t;
        b.term_jacobian(z, t);
        J.resize(b.Vw + b.E, b.Vw + b.E);
        J.setFromTriplets(t.begin(), t.end());
    }

    bool admissible(const VectorXd& z) const override { return b.admissible(z); }
};

struct StepProblem : NewtonProblem {
    const Blocks& b;
    const VectorXd &s, &w, &z0;
    double dt;
    bool inertia;
    StepProblem(const Blocks& bb, const VectorXd& ss, const VectorXd& ww, const VectorXd& zz,
                double d, bool in)
        : b(bb), s(ss), w(ww), z0(zz), dt(d), inertia(in) {}

    double residual(const VectorXd& z, VectorXd& F) const override {
        VectorXd mass, flux;
        double ms, fs;
        b.terms(z, s, w, mass, flux, ms, fs);
        F.resize(b.Vw + b.E);
        F.head(b.Vw) = z.head(b.Vw) - z0.head(b.Vw) - dt * mass.cwiseQuotient(b.inc.Lambda);
        double r1 = F.head(b.Vw).lpNorm<Eigen::Infinity>() /
                    (1.0 + z.head(b.Vw).lpNorm<Eigen::Infinity>());
        double r2;
        if (inertia) {
            F.tail(b.E) = z.tail(b.E) - z0.tail(b.E) + dt * flux;
            r2 = F.tail(b.E).lpNorm<Eigen::Infinity>() /
                 (1.0 + z.tail(b.E).lpNorm<Eigen::Infinity>());
        } else {
            F.tail(b.E) = flux;
            r2 = flux.lpNorm<Eigen::Infinity>() / fs;
        }
        return std::max(r1, r2);
    }

    void jacobian(const VectorXd& z, SpMat& J) const override {
        std::vector<Eigen::Triplet<double>> raw, t;
        b.term_jacobian(z, raw);
        for (const auto& tr : raw) {
            if (tr.row() < b.Vw)
                t.emplace_back(tr.row(), tr.col(), -dt * tr.value() / b.inc.Lambda[tr.row()]);
            else
                t.emplace_back(tr.row(), tr.col(), inertia ? dt * tr.value() : tr.value());
        }
        for (int j = 0; j < b.Vw; ++j) t.emplace_back(j, j, 1.0);
        if (inertia)
            for (int k = 0; k < b.E; ++k) t.emplace_back(b.Vw + k, b.Vw + k, 1.0);
        J.resize(b.Vw + b.E, b.Vw + b.E);
        J.setFromTriplets(t.begin(), t.end());
    }

    bool admissible(const VectorXd& z) const override { return b.admissible(z); }
};

} // namespace

State Dynamics::steady_state(const VectorXd& mu, const VectorXd& s, const VectorXd& w,
                             const State* guess) const {
    IncidenceSet inc = at(mu);
    check_boundary(inc.lay, s, w);
    if (guess) check_state(inc.lay, *guess);
    const int Vw = inc.lay.Vw(), E = inc.lay.E();
    Blocks b(inc, sigma() * sigma());

    VectorXd z(Vw + E);
    if (guess) {
        z.head(Vw) = guess->rho;
        z.tail(E) = guess->phi;
    } else {
        z.head(Vw).setConstant(s.mean());
        // least-norm flux: phi = A'(AA')^-1 w with A = Q'X
        MatrixXd A = MatrixXd(inc.Q.transpose()) * inc.chi.asDiagonal();
        MatrixXd AAt = A * A.transpose();
        z.tail(E) = A.transpose() * AAt.ldlt().solve(w);
    }

    SteadyProblem prob(b, s, w);
    z = newton_solve(prob, z, 1e-10, "steady_state");
    return {z.head(Vw), z.tail(E)};
}

State Dynamics::step_implicit(const State& x, double dt, const VectorXd& mu, const VectorXd& s,
                              const VectorXd& w) const {
    if (!(dt > 0)) throw domain_error("step size must be positive");
    IncidenceSet inc = at(mu);
    check_boundary(inc.lay, s, w);
    check_state(inc.lay, x);
    const int Vw = inc.lay.Vw(), E = inc.lay.E();
    Blocks b(inc, sigma() * sigma());

    VectorXd z0(Vw + E);
    z0.head(Vw) = x.rho;
    z0.tail(E) = x.phi;

    StepProblem prob(b, s, w, z0, dt, inertia_);
    VectorXd z = newton_solve(prob, z0, 1e-9, "step_implicit");
    return {z.head(Vw), z.tail(E)};
}

Trajectory Dynamics::simulate(const BoundaryScenario& scn, const Policy& pol, double dt_s) const {
    if (!(dt_s > 0)) throw domain_error("dt must be positive");
    BoundarySampler bs(rn_.net, scn);

    Trajectory traj;
    VectorXd mu0 = pol.at(0.0);
    State x = steady_state(mu0, bs.supply(0.0), bs.withdrawal(0.0));
    traj.t.push_back(0.0);
    traj.x.push_back(x);
    traj.mu.push_back(mu0);

    double t = 0.0;
    const double T = bs.horizon();
    while (t < T - 1e-9) {
        double tn = std::min(t + dt_s, T);
        VectorXd mu = pol.at(tn);
        x = step_implicit(x, tn - t, mu, bs.supply(tn), bs.withdrawal(tn));
        traj.t.push_back(tn);
        traj.x.push_back(x);
        traj.mu.push_back(mu);
        t = tn;
    }
    return traj;
}

} // namespace gasnet
