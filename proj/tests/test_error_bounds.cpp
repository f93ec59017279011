#include "gasnet/bench.hpp"
#include "gasnet/errors.hpp"
#include "gasnet/error_bounds.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include "doctest.h"
#include "helpers.hpp"

using namespace gasnet;

namespace {

LinearModel cyclic5_model() {
    NetworkSpec net = bench_cyclic5();
    Dynamics dyn(refine(net, 5e3));
    BoundarySampler bs(dyn.net(), embedded_scenario(net));
    VectorXd mu = VectorXd::Constant(3, 1.2);
    State x = dyn.steady_state(mu, bs.supply(0), bs.withdrawal(0));
    return relinearize(dyn, x, mu, bs.supply(0), bs.withdrawal(0));
}

} // namespace

TEST_CASE("bound constants recomputed from the nominal point") {
    LinearModel model = cyclic5_model();
    BoundParams p = bound_params(model);

    double amax = 0, bmax = 0;
    for (int k = 0; k < model.E; ++k) {
        amax = std::max(amax, std::abs(model.alpha[k]));
        bmax = std::max(bmax, std::abs(model.beta[k]));
    }
    double rmax = 0, fmax = 0;
    for (int j = 0; j < model.Vw; ++j) rmax = std::max(rmax, std::abs(model.nom.x.rho[j]));
    for (int k = 0; k < model.E; ++k) fmax = std::max(fmax, std::abs(model.nom.x.phi[k]));

    CHECK(p.a == doctest::Approx(4.0 * amax * rmax).epsilon(1e-14));
    CHECK(p.b == doctest::Approx(2.0 * bmax * fmax).epsilon(1e-14));
    CHECK(p.state_norm == doctest::Approx(std::max(rmax, fmax)).epsilon(1e-14));
    CHECK(p.a > 0);
    CHECK(p.b > 0);
}

TEST_CASE("propagator norm starts at one and integrates monotonically") {
    LinearModel model = cyclic5_model();
    BoundCurve curve(model, 3600.0);

    CHECK(curve.propagator_norm(0.0) == doctest::Approx(1.0));
    CHECK(curve.norm_integral(0.0) == 0.0);
    CHECK(curve.horizon() == 3600.0);

    double prev = 0;
    for (double t : {60.0, 600.0, 1800.0, 3600.0}) {
        double I = curve.norm_integral(t);
        CHECK(I > prev);
        prev = I;
        CHECK(curve.propagator_norm(t) > 0);
    }

    // full-horizon integral equals the trapezoid over the stored samples
    const auto& g = curve.grid();
    const auto& m = curve.norms();
    double direct = 0;
    for (size_t k = 0; k + 1 < g.size(); ++k)
        direct += 0.5 * (m[k] + m[k + 1]) * (g[k + 1] - g[k]);
    CHECK(curve.norm_integral(3600.0) == doctest::Approx(direct).epsilon(1e-12));

    CHECK_THROWS_AS(curve.propagator_norm(-1.0), domain_error);
    CHECK_THROWS_AS(curve.norm_integral(4000.0), domain_error);
    CHECK_THROWS_AS(BoundCurve(model, -5.0), domain_error);
}

TEST_CASE("propagator norm against a direct matrix exponential") {
    // two-state model keeps the direct exponential cheap and well conditioned
    NetworkSpec net = testutil::single_pipe(1e4, 0.5, 0.011, 377.0);
    Dynamics dyn(refine(net, 1e5));
    double chi = 0.25 * M_PI * 0.25;
    VectorXd s = VectorXd::Constant(1, 35.0);
    VectorXd w = VectorXd::Constant(1, chi * 120.0);
    State x = dyn.steady_state(VectorXd(), s, w);
    LinearModel model = relinearize(dyn, x, VectorXd(), s, w);
    BoundCurve curve(model, 1200.0);

    for (double t : {150.0, 600.0, 1050.0}) {
        MatrixXd E = (model.A * t).exp();
        double want = E.cwiseAbs().rowwise().sum().maxCoeff();
        CHECK(curve.propagator_norm(t) == doctest::Approx(want).epsilon(1e-3));
    }
}

TEST_CASE("uniform bound scales quadratically in small perturbations") {
    LinearModel model = cyclic5_model();
    BoundCurve curve(model, 3600.0);

    double e1 = curve.uniform(0.005, 3600.0);
    double e2 = curve.uniform(0.01, 3600.0);
    CHECK(e2 / e1 == doctest::Approx(4.0).epsilon(0.02));
    CHECK(curve.uniform(0.01, 0.0) == 0.0);

    // nondecreasing in time and in kappa
    double prev = 0;
    for (double t : {600.0, 1200.0, 2400.0, 3600.0}) {
        double e = curve.uniform(0.1, t);
        CHECK(e >= prev);
        prev = e;
    }
    CHECK(curve.uniform(0.2, 1800.0) > curve.uniform(0.1, 1800.0));

    CHECK_THROWS_AS(curve.uniform(0.0, 600.0), domain_error);
    CHECK_THROWS_AS(curve.uniform(1.0, 600.0), domain_error);
    CHECK_THROWS_AS(curve.uniform(-0.2, 600.0), domain_error);
}

TEST_CASE("uniform bound closed form on the sampled grid") {
    LinearModel model = cyclic5_model();
    BoundCurve curve(model, 1800.0);
    BoundParams p = bound_params(model);

    double kappa = 0.15, t = 1500.0;
    double c = p.a * kappa * kappa / ((1 - kappa) * (1 - kappa)) +
               p.b * kappa * kappa / (1 - kappa);
    double want = 100.0 * c * curve.norm_integral(t) / p.state_norm;
    CHECK(curve.uniform(kappa, t) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("sinusoidal weighting never exceeds the uniform envelope") {
    LinearModel model = cyclic5_model();
    BoundCurve curve(model, 7200.0);

    for (double kappa : {0.05, 0.2}) {
        for (double t : {900.0, 3600.0, 7200.0}) {
            double tv = curve.time_varying(kappa, t, 3600.0);
            CHECK(tv >= 0.0);
            CHECK(tv <= curve.uniform(kappa, t) * (1.0 + 1e-9));
        }
    }
    CHECK(curve.time_varying(0.1, 0.0) == 0.0);
    CHECK_THROWS_AS(curve.time_varying(0.1, 600.0, -3600.0), domain_error);

    // over many fast cycles sin^2 averages to one half of the uniform weight
    double ratio = curve.time_varying(0.1, 7200.0, 360.0) / curve.uniform(0.1, 7200.0);
    CHECK(ratio == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("empirical gap of equal and scaled trajectories") {
    NetworkSpec net = testutil::single_pipe(3e4, 0.5, 0.011, 377.0);
    net.profiles[1] = Profile{{0.0, 3600.0}, {35.0, 35.0}};
    net.profiles[2] = Profile{{0.0, 3600.0}, {12.0, 14.0}};
    validate(net);
    Dynamics dyn(refine(net, 1e4));
    Trajectory a = dyn.simulate(embedded_scenario(net), Policy{{0.0}, {VectorXd()}}, 600.0);

    EmpiricalGap zero = empirical_gap(a, a);
    CHECK(zero.rho_pct == 0.0);
    CHECK(zero.phi_pct == 0.0);
    CHECK(zero.mu_pct == 0.0);

    Trajectory b = a;
    for (State& x : b.x) {
        x.rho *= 1.01;
        x.phi *= 1.01;
    }
    EmpiricalGap one = empirical_gap(a, b);
    CHECK(one.rho_pct == doctest::Approx(200.0 * 0.01 / 2.01).epsilon(1e-9));
    CHECK(one.phi_pct == doctest::Approx(200.0 * 0.01 / 2.01).epsilon(1e-9));

    Trajectory c = a;
    c.t.pop_back();
    c.x.pop_back();
    c.mu.pop_back();
    CHECK_THROWS_AS(empirical_gap(a, c), domain_error);
    Trajectory d = a;
    d.t[1] += 100.0;
    CHECK_THROWS_AS(empirical_gap(a, d), domain_error);
}

TEST_CASE("a priori bound dominates a measured linearization error") {
    // three-segment pipe under a genuine perturbation of the boundary data
    NetworkSpec net = testutil::single_pipe(3e4, 0.5, 0.011, 377.0);
    Dynamics dyn(refine(net, 1e4));
    double chi = 0.25 * M_PI * 0.25;
    VectorXd s = VectorXd::Constant(1, 40.0);
    VectorXd w = VectorXd::Zero(3);
    w[0] = chi * 100.0;

    State x0 = dyn.steady_state(VectorXd(), s, w);
    LinearModel model = relinearize(dyn, x0, VectorXd(), s, w);

    // nudge the withdrawal and march both models from the same start
    VectorXd w2 = w * 1.08;
    const double dt = 60.0, T = 1800.0;
    State xn = x0;
    State xl = x0;
    double worst = 0, kappa_seen = 0;
    BoundParams p = bound_params(model);
    for (int n = 1; n <= int(T / dt); ++n) {
        xn = dyn.step_implicit(xn, dt, VectorXd(), s, w2);
        xl = testutil::linear_step(dyn, model, xl, dt, VectorXd(), s, w2);
        double gap = std::max((xn.rho - xl.rho).lpNorm<Eigen::Infinity>(),
                              (xn.phi - xl.phi).lpNorm<Eigen::Infinity>());
        worst = std::max(worst, gap);
        double dev = std::max((xn.rho - x0.rho).lpNorm<Eigen::Infinity>(),
                              (xn.phi - x0.phi).lpNorm<Eigen::Infinity>());
        kappa_seen = std::max(kappa_seen, dev / p.state_norm);
    }
    REQUIRE(kappa_seen < 0.2);

    BoundCurve curve(model, T);
    double bound_pct = curve.uniform(std::max(kappa_seen, 0.01), T);
    CHECK(100.0 * worst / p.state_norm <= bound_pct);
}
