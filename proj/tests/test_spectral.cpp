#include "gasnet/bench.hpp"
#include "gasnet/errors.hpp"
#include "gasnet/spectral.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include "doctest.h"
#include "helpers.hpp"

using namespace gasnet;

namespace {

// Independent oracle: the transformed pipe equations are a linear ODE in x,
//   d/dx [rho; phi] = C [rho; phi],  C = [[alpha/sigma^2, -z/sigma^2], [-s, 0]],
// so the boundary map follows from the matrix exponential T = exp(C ell) by
// solving for [rho(ell); phi(0)] in terms of [rho(0); phi(ell)].
Transfer2 expm_oracle(const PipeFrequencyParams& p, Complex s) {
    const double sig2 = p.sigma * p.sigma;
    const double alpha = p.with_gradient
                             ? p.friction * p.phi_bar * std::abs(p.phi_bar) /
                                   (2.0 * p.diameter_m * p.rho_bar * p.rho_bar)
                             : 0.0;
    const double beta = p.friction * std::abs(p.phi_bar) / (p.diameter_m * p.rho_bar);
    const Complex z = (p.inertia ? s : Complex(0)) + (p.flipped_damping ? -beta : beta);

    Eigen::Matrix2cd C;
    C << Complex(alpha / sig2), -z / sig2, -s, Complex(0);
    Eigen::Matrix2cd T = (C * p.length_m).exp();
    return {T(0, 0) - T(0, 1) * T(1, 0) / T(1, 1), T(0, 1) / T(1, 1), -T(1, 0) / T(1, 1),
            Complex(1.0) / T(1, 1)};
}

void check_against_oracle(const PipeFrequencyParams& p, Complex s, double tol = 1e-9) {
    Transfer2 got = transfer_matrix(p, s);
    Transfer2 want = expm_oracle(p, s);
    for (int c = 0; c < 4; ++c) {
        CAPTURE(c);
        CAPTURE(s.real());
        CAPTURE(s.imag());
        CHECK(std::abs(got[c] - want[c]) <= tol * (1.0 + std::abs(want[c])));
    }
}

PipeFrequencyParams wide_pipe() {
    PipeFrequencyParams p;
    p.length_m = 1e5;
    p.diameter_m = 0.9144;
    p.friction = 0.01;
    p.sigma = 377.964;
    p.rho_bar = 45.0;
    p.phi_bar = 250.0;
    return p;
}

PipeFrequencyParams narrow_pipe() {
    PipeFrequencyParams p;
    p.length_m = 2e4;
    p.diameter_m = 0.5;
    p.friction = 0.011;
    p.sigma = 377.0;
    p.rho_bar = 35.0;
    p.phi_bar = -300.0; // reversed flow exercises the sign of the gradient term
    return p;
}

} // namespace

TEST_CASE("boundary transfer agrees with the matrix exponential oracle") {
    const Complex svals[] = {Complex(1e-13, 0), Complex(0, 1e-3), Complex(0.01, 0.02),
                             Complex(0, 0.04), Complex(-0.003, 0.01)};
    for (PipeFrequencyParams base : {wide_pipe(), narrow_pipe()}) {
        for (int variant = 0; variant < 4; ++variant) {
            PipeFrequencyParams p = base;
            p.inertia = (variant & 1) != 0;
            p.with_gradient = (variant & 2) != 0;
            for (Complex s : svals) check_against_oracle(p, s);
        }
        PipeFrequencyParams p = base;
        p.flipped_damping = true;
        for (Complex s : svals) check_against_oracle(p, s);
    }
}

TEST_CASE("series branch joins the direct expressions smoothly") {
    PipeFrequencyParams p = wide_pipe();
    p.with_gradient = false;
    // gamma ell crosses the 1e-4 series threshold near s = 7.5e-13
    check_against_oracle(p, Complex(1e-13, 0));
    check_against_oracle(p, Complex(1e-11, 0));
    check_against_oracle(p, Complex(0, 1e-13));
    check_against_oracle(p, Complex(0, 1e-11));
}

TEST_CASE("zero-frequency limit without the gradient term") {
    PipeFrequencyParams p = wide_pipe();
    p.with_gradient = false;
    Transfer2 G = transfer_matrix(p, Complex(0, 0));
    double beta = p.friction * std::abs(p.phi_bar) / (p.diameter_m * p.rho_bar);
    CHECK(std::abs(G[0] - 1.0) <= 1e-12);
    CHECK(std::abs(G[3] - 1.0) <= 1e-12);
    CHECK(std::abs(G[2]) <= 1e-12);
    CHECK(std::abs(G[1] + beta * p.length_m / (p.sigma * p.sigma)) <= 1e-9);

    // and the diagonal stays symmetric whenever the gradient term is off
    for (Complex s : {Complex(0, 0.01), Complex(0.005, 0.02)}) {
        Transfer2 H = transfer_matrix(p, s);
        CHECK(std::abs(H[0] - H[3]) <= 1e-12 * (1.0 + std::abs(H[0])));
    }
}

TEST_CASE("lossless pipe responds like a secant") {
    PipeFrequencyParams p;
    p.length_m = 1e4;
    p.diameter_m = 0.5;
    p.friction = 0.011;
    p.sigma = 377.0;
    p.rho_bar = 35.0;
    p.phi_bar = 0.0; // no friction gradient or damping at zero base flow
    for (double theta : {0.3, 1.0, 1.3}) {
        double omega = theta * p.sigma / p.length_m;
        Transfer2 G = transfer_matrix(p, Complex(0, omega));
        CHECK(std::abs(G[0]) == doctest::Approx(1.0 / std::cos(theta)).epsilon(1e-9));
        CHECK(std::abs(G[0]) >= 1.0);
    }
}

TEST_CASE("flow response to outlet pressure grows with frequency") {
    PipeFrequencyParams p;
    p.length_m = 5e4;
    p.diameter_m = 0.5;
    p.friction = 0.011;
    p.sigma = 377.0;
    p.rho_bar = 35.0;
    p.phi_bar = 300.0;
    p.inertia = false;
    p.with_gradient = false;

    FrequencyResponse r = frequency_response(p, 0.1, 10.0, 30);
    CHECK(r.f_cyc_hr.front() == doctest::Approx(0.1));
    CHECK(r.f_cyc_hr.back() == doctest::Approx(10.0));
    CHECK(r.mag.back()[2] >= 2.0 * r.mag.front()[2]);
    for (int c = 0; c < 4; ++c)
        for (size_t i = 1; i < r.phase.size(); ++i)
            CHECK(std::abs(r.phase[i][c] - r.phase[i - 1][c]) <= M_PI);

    CHECK_THROWS_AS(frequency_response(p, 1.0, 0.5, 10), domain_error);
    CHECK_THROWS_AS(transfer_matrix(PipeFrequencyParams{}, Complex(0, 1)), domain_error);
}

TEST_CASE("equivalent-frequency scan behaves sensibly") {
    PipeFrequencyParams full = narrow_pipe();
    full.phi_bar = 300.0;
    PipeFrequencyParams algebraic = full;
    algebraic.inertia = false;

    CHECK(max_equivalent_frequency(full, full, 0.01, 0.01, 0.05, 50.0) ==
          doctest::Approx(50.0));

    double tight = max_equivalent_frequency(full, algebraic, 0.01, 0.01, 0.05, 50.0);
    double loose = max_equivalent_frequency(full, algebraic, 0.10, 0.10, 0.05, 50.0);
    CHECK(tight > 0.05);
    CHECK(tight < 50.0); // the models must eventually separate
    CHECK(loose >= tight);
}

TEST_CASE("eigenvalue helper sorts and sums correctly") {
    MatrixXd D = MatrixXd::Zero(3, 3);
    D.diagonal() << 3.0, -1.0, 2.0;
    Eigen::VectorXcd eigs = eigenvalues(D);
    CHECK(eigs[0].real() == doctest::Approx(-1.0));
    CHECK(eigs[1].real() == doctest::Approx(2.0));
    CHECK(eigs[2].real() == doctest::Approx(3.0));

    MatrixXd R(2, 2);
    R << 0.0, 1.0, -1.0, 0.0;
    Eigen::VectorXcd pair = eigenvalues(R);
    CHECK(std::min(pair[0].imag(), pair[1].imag()) == doctest::Approx(-1.0));
    CHECK(std::max(pair[0].imag(), pair[1].imag()) == doctest::Approx(1.0));
    CHECK(center_of_gravity(pair) == doctest::Approx(0.0));

    CHECK_THROWS_AS(eigenvalues(MatrixXd::Zero(2, 3)), domain_error);
}

TEST_CASE("spectral center matches the damping trace") {
    std::mt19937 rng(61);
    for (int trial = 0; trial < 3; ++trial) {
        NetworkSpec net = trial == 0 ? bench_cyclic5()
                                     : testutil::random_network(rng, 15 + int(rng() % 20), 2, 1);
        Dynamics dyn(refine(net, trial == 0 ? 5e3 : 2e4));
        VectorXd s, w;
        VectorXd mu = VectorXd::Constant(dyn.nc(), 1.2);
        if (trial == 0) {
            BoundarySampler bs(dyn.net(), embedded_scenario(net));
            s = bs.supply(0);
            w = bs.withdrawal(0);
        } else {
            testutil::random_loads(rng, dyn.lay(), s, w);
        }
        State x = dyn.steady_state(mu, s, w);
        LinearModel model = relinearize(dyn, x, mu, s, w);
        double cog = center_of_gravity(model);
        double want = -model.beta.sum() / model.dim();
        CHECK(cog == doctest::Approx(want).epsilon(1e-9));
    }
}

TEST_CASE("single pipe spectral center sits at half the damping rate") {
    for (double lmax : {3e3, 1e3, 3e2}) {
        NetworkSpec net = testutil::single_pipe(3e4, 0.5, 0.011, 377.0);
        Dynamics dyn(refine(net, lmax));
        double phi = 2.0; // slow flow keeps the friction drop negligible
        double chi = 0.25 * M_PI * 0.25;
        VectorXd s = VectorXd::Constant(1, 35.0);
        VectorXd w = VectorXd::Zero(dyn.lay().Vw());
        w[0] = chi * phi;

        State x = dyn.steady_state(VectorXd(), s, w);
        LinearModel model = relinearize(dyn, x, VectorXd(), s, w);
        double beta = 2.0 * (0.011 / (2 * 0.5)) * phi / 35.0;
        CHECK(center_of_gravity(model) == doctest::Approx(-beta / 2.0).epsilon(1e-5));
    }
}

TEST_CASE("density-only matrix is a weighted graph laplacian") {
    std::mt19937 rng(62);
    NetworkSpec net = testutil::random_network(rng, 18, 0, 0);
    Dynamics dyn(refine(net, 2e4));
    VectorXd s, w;
    testutil::random_loads(rng, dyn.lay(), s, w);
    State x = dyn.steady_state(VectorXd(), s, w);

    MatrixXd A = simplified_state_matrix(dyn, x);
    CHECK(A.rows() == dyn.lay().Vw());

    VectorXd lam = dyn.base().Lambda;
    MatrixXd sym = lam.cwiseSqrt().asDiagonal() * A *
                   lam.cwiseSqrt().cwiseInverse().asDiagonal();
    CHECK((sym - sym.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * sym.cwiseAbs().maxCoeff());

    Eigen::VectorXcd eigs = eigenvalues(A);
    for (int i = 0; i < eigs.size(); ++i) {
        CHECK(std::abs(eigs[i].imag()) <= 1e-10);
        CHECK(eigs[i].real() < 0.0);
    }

    State dead = x;
    dead.phi[3] = 0.0;
    CHECK_THROWS_AS(simplified_state_matrix(dyn, dead), domain_error);
}

TEST_CASE("single segment density matrix by hand") {
    NetworkSpec net = testutil::single_pipe(1e4, 0.5, 0.011, 377.0);
    Dynamics dyn(refine(net, 1e5));
    State x{VectorXd::Constant(1, 35.0), VectorXd::Constant(1, 120.0)};

    MatrixXd A = simplified_state_matrix(dyn, x);
    double chi = 0.25 * M_PI * 0.25;
    double r2 = 377.0 * 377.0 * chi * 35.0 / (2.0 * (0.011 / (2 * 0.5)) * 1e4 * 120.0);
    CHECK(A(0, 0) == doctest::Approx(-r2 / (chi * 1e4)).epsilon(1e-12));
}

TEST_CASE("pipe pole families") {
    const double sigma = 377.0, ell = 5e4;

    SUBCASE("no damping puts every pole on the imaginary axis") {
        auto poles = pipe_poles(0.0, sigma, ell, 3);
        REQUIRE(poles.size() == 8);
        for (int m = 0; m <= 3; ++m) {
            double k = M_PI * sigma * (2 * m + 1) / (2.0 * ell);
            CHECK(poles[2 * m].real() == 0.0);
            CHECK(std::abs(poles[2 * m].imag()) == doctest::Approx(k).epsilon(1e-12));
        }
    }

    SUBCASE("pole pairs always sum to minus the damping rate") {
        for (double beta : {0.001, 0.02, 0.4}) {
            auto poles = pipe_poles(beta, sigma, ell, 4);
            for (size_t j = 0; j + 1 < poles.size(); j += 2) {
                Complex sum = poles[j] + poles[j + 1];
                CHECK(sum.real() == doctest::Approx(-beta).epsilon(1e-12));
                CHECK(sum.imag() == doctest::Approx(0.0));
            }
        }
    }

    SUBCASE("heavy damping splits the slowest pair onto the real axis") {
        double ell2 = 1e5;
        double crit = M_PI * sigma / ell2; // beta above this makes m=0 overdamped
        auto poles = pipe_poles(2.0 * crit, sigma, ell2, 1);
        CHECK(poles[0].imag() == 0.0);
        CHECK(poles[1].imag() == 0.0);
        CHECK(poles[0].real() < 0.0);
        CHECK(poles[2].imag() != 0.0); // m=1 stays oscillatory
    }

    SUBCASE("poles null the transfer denominator") {
        // at a pole, gamma ell is an odd multiple of i pi/2, so cosh vanishes
        for (double beta : {0.0, 0.05, 0.3}) {
            auto poles = pipe_poles(beta, sigma, ell, 3);
            for (Complex zeta : poles) {
                Complex gl = std::sqrt(zeta * (zeta + beta)) / sigma * ell;
                CHECK(std::abs(std::cosh(gl)) <= 1e-6);
            }
        }
    }

    CHECK_THROWS_AS(pipe_poles(0.1, -1.0, 1e4, 2), domain_error);
}

TEST_CASE("network pole map routes per-edge parameters") {
    NetworkSpec net;
    net.nodes = {{1, true}, {2, false}, {3, false}, {4, false}};
    double dia = std::sqrt(4.0 / M_PI); // unit cross-section
    net.pipes = {{1, 1, 2, 3e4, dia, 0.011}, {2, 2, 3, 5e4, dia, 0.011},
                 {3, 3, 4, 2e4, dia, 0.011}};
    net.lim = {377.0, 5.0, 80.0, -1e9, std::numeric_limits<double>::infinity()};
    validate(net);
    Dynamics dyn(refine(net, 1e5));

    State x{VectorXd::Constant(3, 40.0), VectorXd(3)};
    x.phi << 770.0, 270.0, 70.0;

    NetworkPoles np = network_poles(dyn, x, 2);
    REQUIRE(np.per_edge.size() == 3);
    double lengths[] = {3e4, 5e4, 2e4};
    for (int k = 0; k < 3; ++k) {
        double beta = 0.011 * x.phi[k] / (dia * 40.0);
        CHECK(np.asymptote[k] == doctest::Approx(-beta / 2.0).epsilon(1e-12));
        auto want = pipe_poles(beta, 377.0, lengths[k], 2);
        REQUIRE(np.per_edge[k].size() == want.size());
        for (size_t j = 0; j < want.size(); ++j)
            CHECK(std::abs(np.per_edge[k][j] - want[j]) <= 1e-12 * (1.0 + std::abs(want[j])));
    }
}
