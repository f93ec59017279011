#include "gasnet/error_bounds.hpp"

#include "gasnet/errors.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

namespace gasnet {

BoundParams bound_params(const LinearModel& model) {
    BoundParams p;
    p.a = 4.0 * model.alpha.lpNorm<Eigen::Infinity>() *
          model.nom.x.rho.lpNorm<Eigen::Infinity>();
    p.b = 2.0 * model.beta.lpNorm<Eigen::Infinity>() *
          model.nom.x.phi.lpNorm<Eigen::Infinity>();
    p.state_norm = std::max(model.nom.x.rho.lpNorm<Eigen::Infinity>(),
                            model.nom.x.phi.lpNorm<Eigen::Infinity>());
    return p;
}

namespace {

// |e^{A k dt}|inf for k = 0..n via powers of one short-step exponential
std::vector<double> propagator_norms(const MatrixXd& A, double T, int n) {
    const MatrixXd P = (A * (T / n)).exp();
    MatrixXd W = MatrixXd::Identity(A.rows(), A.cols());
    std::vector<double> out(n + 1);
    out[0] = 1.0;
    for (int k = 1; k <= n; ++k) {
        W = W * P;
        out[k] = W.cwiseAbs().rowwise().sum().maxCoeff();
        if (!std::isfinite(out[k]) || out[k] > 1e150)
            throw solver_error("propagator norm overflow; linearized system looks unstable");
    }
    return out;
}

} // namespace

BoundCurve::BoundCurve(const LinearModel& model, double horizon_s, int steps) {
    if (!(horizon_s > 0)) throw domain_error("bound horizon must be positive");
    p_ = bound_params(model);
    T_ = horizon_s;

    int n = steps > 0 ? steps : 512;
    nrm_ = propagator_norms(model.A, T_, n);
    if (steps <= 0) {
        double prev = 0;
        for (;;) {
            double total = 0;
            for (int k = 0; k + 1 < int(nrm_.size()); ++k)
                total += 0.5 * (nrm_[k] + nrm_[k + 1]) * (T_ / n);
            if (prev > 0 && std::abs(total - prev) <= 1e-4 * total) break;
            if (n >= 1 << 16) break;
            prev = total;
            n *= 2;
            nrm_ = propagator_norms(model.A, T_, n);
        }
    }
    tau_.resize(nrm_.size());
    cum_.resize(nrm_.size());
    cum_[0] = 0;
    for (size_t k = 0; k < tau_.size(); ++k) tau_[k] = T_ * double(k) / double(n);
    for (size_t k = 1; k < tau_.size(); ++k)
        cum_[k] = cum_[k - 1] + 0.5 * (nrm_[k - 1] + nrm_[k]) * (tau_[k] - tau_[k - 1]);
}

double BoundCurve::propagator_norm(double t) const {
    if (t < 0 || t > T_ * (1 + 1e-9)) throw domain_error("time outside the bound horizon");
    double u = std::min(t, T_) / T_ * double(nrm_.size() - 1);
    size_t k = std::min(size_t(u), nrm_.size() - 2);
    double f = u - double(k);
    return nrm_[k] * (1 - f) + nrm_[k + 1] * f;
}

double BoundCurve::norm_integral(double t) const {
    if (t < 0 || t > T_ * (1 + 1e-9)) throw domain_error("time outside the bound horizon");
    double u = std::min(t, T_) / T_ * double(nrm_.size() - 1);
    size_t k = std::min(size_t(u), nrm_.size() - 2);
    double tk = tau_[k], dt = tau_[k + 1] - tk;
    double f = u - double(k);
    double end = nrm_[k] * (1 - f) + nrm_[k + 1] * f;
    return cum_[k] + 0.5 * (nrm_[k] + end) * f * dt;
}

double BoundCurve::weight_check(double kappa) const {
    if (!(kappa > 0) || !(kappa < 1))
        throw domain_error("perturbation fraction must lie in (0, 1)");
    if (!(p_.state_norm > 0)) throw domain_error("nominal state norm is zero");
    return kappa;
}

double BoundCurve::uniform(double kappa, double t) const {
    weight_check(kappa);
    double c = p_.a * kappa * kappa / ((1 - kappa) * (1 - kappa)) +
               p_.b * kappa * kappa / (1 - kappa);
    return 100.0 * c * norm_integral(t) / p_.state_norm;
}

double BoundCurve::time_varying(double kappa, double t, double period_s) const {
    weight_check(kappa);
    if (!(period_s > 0)) throw domain_error("perturbation period must be positive");
    if (t < 0 || t > T_ * (1 + 1e-9)) throw domain_error("time outside the bound horizon");

    double c0 = (p_.a / ((1 - kappa) * (1 - kappa)) + p_.b / (1 - kappa)) / p_.state_norm;
    auto wt = [&](size_t k) {
        double sn = std::sin(2.0 * M_PI * tau_[k] / period_s);
        return kappa * kappa * sn * sn * nrm_[k];
    };
    double u = std::min(t, T_) / T_ * double(nrm_.size() - 1);
    size_t kend = std::min(size_t(u), nrm_.size() - 2);
    double total = 0;
    for (size_t k = 0; k < kend; ++k)
        total += 0.5 * (wt(k) + wt(k + 1)) * (tau_[k + 1] - tau_[k]);
    double f = u - double(kend);
    if (f > 0) {
        double te = tau_[kend] + f * (tau_[kend + 1] - tau_[kend]);
        double sn = std::sin(2.0 * M_PI * te / period_s);
        double we = kappa * kappa * sn * sn * propagator_norm(te);
        total += 0.5 * (wt(kend) + we) * (te - tau_[kend]);
    }
    return 100.0 * c0 * total;
}

EmpiricalGap empirical_gap(const Trajectory& a, const Trajectory& b) {
    if (a.t.size() != b.t.size() || a.t.empty())
        throw domain_error("trajectories must share one nonempty time grid");
    for (size_t i = 0; i < a.t.size(); ++i)
        if (std::abs(a.t[i] - b.t[i]) > 1e-6 * (1 + std::abs(a.t[i])))
            throw domain_error("trajectories must share one time grid");

    EmpiricalGap g;
    for (size_t i = 0; i < a.t.size(); ++i) {
        double dr = (a.x[i].rho - b.x[i].rho).lpNorm<Eigen::Infinity>();
        double sr = (a.x[i].rho + b.x[i].rho).lpNorm<Eigen::Infinity>();
        double dp = (a.x[i].phi - b.x[i].phi).lpNorm<Eigen::Infinity>();
        double sp = (a.x[i].phi + b.x[i].phi).lpNorm<Eigen::Infinity>();
        if (sr > 0) g.rho_pct = std::max(g.rho_pct, 200.0 * dr / sr);
        if (sp > 0) g.phi_pct = std::max(g.phi_pct, 200.0 * dp / sp);
        if (a.mu[i].size() > 0 && a.mu[i].size() == b.mu[i].size()) {
            double dm = (a.mu[i] - b.mu[i]).lpNorm<Eigen::Infinity>();
            double sm = (a.mu[i] + b.mu[i]).lpNorm<Eigen::Infinity>();
            if (sm > 0) g.mu_pct = std::max(g.mu_pct, 200.0 * dm / sm);
        }
    }
    return g;
}

} // namespace gasnet
