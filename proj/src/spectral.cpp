#include "gasnet/spectral.hpp"

#include "gasnet/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace gasnet {

double PipeFrequencyParams::alpha() const {
    if (!with_gradient) return 0.0;
    return friction * phi_bar * std::abs(phi_bar) / (2.0 * diameter_m * rho_bar * rho_bar);
}

double PipeFrequencyParams::beta() const {
    return friction * std::abs(phi_bar) / (diameter_m * rho_bar);
}

Transfer2 transfer_matrix(const PipeFrequencyParams& p, Complex s) {
    if (!(p.length_m > 0) || !(p.diameter_m > 0) || !(p.sigma > 0) || !(p.rho_bar > 0))
        throw domain_error("transfer_matrix: pipe parameters must be positive");

    const double sig2 = p.sigma * p.sigma;
    const double g = p.alpha() / (2.0 * sig2); // 1/m
    const Complex z = (p.inertia ? s : Complex(0)) + (p.flipped_damping ? -p.beta() : p.beta());
    const Complex gamma = std::sqrt(Complex(g * g) + s * z / sig2);
    const double ell = p.length_m;

    Transfer2 G;
    if (std::abs(gamma) * ell < 1e-4) {
        // near-degenerate propagation constant: series in gamma*ell
        const Complex u = gamma * ell;
        const Complex shc = ell * (1.0 + u * u / 6.0 * (1.0 + u * u / 20.0));
        const Complex ch = 1.0 + u * u / 2.0 * (1.0 + u * u / 12.0);
        const Complex den = ch - g * shc;
        G[0] = std::exp(g * ell) / den;
        G[1] = -(z / sig2) * shc / den;
        G[2] = s * shc / den;
        G[3] = std::exp(-g * ell) / den;
        return G;
    }

    // grouped so only decaying exponentials of gamma appear
    const Complex E1 = std::exp(-gamma * ell);
    const Complex E2 = E1 * E1;
    const Complex den = (Complex(g) - gamma) - (Complex(g) + gamma) * E2;
    G[0] = -2.0 * gamma * E1 * std::exp(g * ell) / den;
    G[1] = (z / sig2) * (1.0 - E2) / den;
    G[2] = -s * (1.0 - E2) / den;
    G[3] = -2.0 * gamma * E1 * std::exp(-g * ell) / den;
    return G;
}

FrequencyResponse frequency_response(const PipeFrequencyParams& p, double fmin_cyc_hr,
                                     double fmax_cyc_hr, int n) {
    if (!(fmin_cyc_hr > 0) || !(fmax_cyc_hr > fmin_cyc_hr) || n < 2)
        throw domain_error("frequency_response: need 0 < fmin < fmax and n >= 2");

    FrequencyResponse r;
    r.f_cyc_hr.resize(n);
    r.mag.resize(n);
    r.phase.resize(n);
    const double lr = std::log(fmax_cyc_hr / fmin_cyc_hr);
    std::array<double, 4> prev{};
    for (int i = 0; i < n; ++i) {
        double f = fmin_cyc_hr * std::exp(lr * i / (n - 1));
        r.f_cyc_hr[i] = f;
        Transfer2 G = transfer_matrix(p, Complex(0.0, 2.0 * M_PI * f / 3600.0));
        for (int c = 0; c < 4; ++c) {
            r.mag[i][c] = std::abs(G[c]);
            double ph = std::arg(G[c]);
            if (i > 0) {
                while (ph - prev[c] > M_PI) ph -= 2.0 * M_PI;
                while (ph - prev[c] < -M_PI) ph += 2.0 * M_PI;
            }
            r.phase[i][c] = ph;
            prev[c] = ph;
        }
    }
    return r;
}

namespace {

bool responses_differ(const PipeFrequencyParams& a, const PipeFrequencyParams& b, double f,
                      double tol_mag, double tol_phase) {
    Transfer2 Ga = transfer_matrix(a, Complex(0.0, 2.0 * M_PI * f / 3600.0));
    Transfer2 Gb = transfer_matrix(b, Complex(0.0, 2.0 * M_PI * f / 3600.0));
    double ref = 0;
    for (int c = 0; c < 4; ++c) ref = std::max(ref, std::abs(Gb[c]));
    const double floor = 1e-9 * (1.0 + ref);
    for (int c = 0; c < 4; ++c) {
        double ma = std::abs(Ga[c]), mb = std::abs(Gb[c]);
        if (std::max(ma, mb) < floor) continue; // dead coefficient
        if (std::abs(ma - mb) > tol_mag * std::max(mb, floor)) return true;
        if (std::abs(std::arg(Ga[c] * std::conj(Gb[c]))) > tol_phase) return true;
    }
    return false;
}

} // namespace

double max_equivalent_frequency(const PipeFrequencyParams& a, const PipeFrequencyParams& b,
                                double tol_mag_rel, double tol_phase_rad, double fmin_cyc_hr,
                                double fmax_cyc_hr, int grid) {
    if (!(fmin_cyc_hr > 0) || !(fmax_cyc_hr > fmin_cyc_hr) || grid < 2)
        throw domain_error("max_equivalent_frequency: bad frequency range");

    const double lr = std::log(fmax_cyc_hr / fmin_cyc_hr);
    double lo = -1, hi = -1;
    for (int i = 0; i < grid; ++i) {
        double f = fmin_cyc_hr * std::exp(lr * i / (grid - 1));
        if (responses_differ(a, b, f, tol_mag_rel, tol_phase_rad)) {
            if (i == 0) return 0.0;
            lo = fmin_cyc_hr * std::exp(lr * (i - 1) / (grid - 1));
            hi = f;
            break;
        }
    }
    if (lo < 0) return fmax_cyc_hr;
    while (hi / lo > 1.0 + 1e-4) {
        double mid = std::sqrt(lo * hi);
        if (responses_differ(a, b, mid, tol_mag_rel, tol_phase_rad))
            hi = mid;
        else
            lo = mid;
    }
    return lo;
}

Eigen::VectorXcd eigenvalues(const MatrixXd& A) {
    if (A.rows() != A.cols()) throw domain_error("eigenvalues: matrix must be square");
    Eigen::EigenSolver<MatrixXd> es(A, false);
    if (es.info() != Eigen::Success) throw solver_error("eigenvalue iteration failed");
    Eigen::VectorXcd v = es.eigenvalues();
    std::sort(v.data(), v.data() + v.size(), [](const Complex& x, const Complex& y) {
        if (x.real() != y.real()) return x.real() < y.real();
        return x.imag() < y.imag();
    });
    return v;
}

double center_of_gravity(const Eigen::VectorXcd& eigs) {
    if (eigs.size() == 0) throw domain_error("center_of_gravity: empty spectrum");
    return eigs.real().sum() / double(eigs.size());
}

double center_of_gravity(const LinearModel& model) {
    return center_of_gravity(eigenvalues(model.A));
}

MatrixXd simplified_state_matrix(const Dynamics& dyn, const State& x_bar) {
    const IncidenceSet& inc = dyn.base();
    const int Vw = int(inc.lay.Vw()), E = int(inc.lay.E());
    const VectorXd rho_out = inc.Ql * x_bar.rho;
    const double sig2 = dyn.sigma() * dyn.sigma();

    VectorXd R2(E);
    for (int k = 0; k < E; ++k) {
        if (x_bar.phi[k] == 0.0)
            throw domain_error("simplified state matrix needs nonzero flux on edge " +
                               std::to_string(inc.lay.edge_ids[k]));
        R2[k] = sig2 * inc.chi[k] * rho_out[k] /
                (2.0 * inc.K[k] * inc.ell[k] * std::abs(x_bar.phi[k]));
    }

    MatrixXd A = MatrixXd::Zero(Vw, Vw);
    for (int k = 0; k < E; ++k)
        for (SpMat::InnerIterator it(inc.Q, k); it; ++it)
            for (SpMat::InnerIterator jt(inc.Q, k); jt; ++jt)
                A(it.col(), jt.col()) -= it.value() * jt.value() * R2[k] / inc.Lambda[it.col()];
    return A;
}

std::vector<Complex> pipe_poles(double beta, double sigma, double length_m, int mmax) {
    if (!(length_m > 0) || !(sigma > 0) || mmax < 0)
        throw domain_error("pipe_poles: bad arguments");
    std::vector<Complex> out;
    out.reserve(2 * (mmax + 1));
    for (int m = 0; m <= mmax; ++m) {
        double k = M_PI * sigma * (2 * m + 1) / (2.0 * length_m);
        double disc = beta * beta / 4.0 - k * k;
        if (disc >= 0) {
            double r = std::sqrt(disc);
            out.emplace_back(-beta / 2.0 + r, 0.0);
            out.emplace_back(-beta / 2.0 - r, 0.0);
        } else {
            double im = std::sqrt(-disc);
            out.emplace_back(-beta / 2.0, im);
            out.emplace_back(-beta / 2.0, -im);
        }
    }
    return out;
}

NetworkPoles network_poles(const Dynamics& dyn, const State& x_bar, int mmax) {
    const IncidenceSet& inc = dyn.base();
    VectorXd alpha, beta;
    dyn.friction_jacobian(inc, x_bar, alpha, beta);

    NetworkPoles np;
    np.asymptote = -0.5 * beta;
    np.per_edge.resize(beta.size());
    for (int k = 0; k < beta.size(); ++k)
        np.per_edge[k] = pipe_poles(beta[k], dyn.sigma(), inc.ell[k], mmax);
    return np;
}

} // namespace gasnet
