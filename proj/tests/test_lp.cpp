#include "gasnet/errors.hpp"
#include "gasnet/lp.hpp"

#include "doctest.h"

#include <random>

using namespace gasnet;

namespace {

LpProblem box2(double xlo, double xhi, double ylo, double yhi) {
    LpProblem p;
    p.A = MatrixXd(4, 2);
    p.A << 1, 0, -1, 0, 0, 1, 0, -1;
    p.b = VectorXd(4);
    p.b << xhi, -xlo, yhi, -ylo;
    return p;
}

// brute force a 2-variable LP on a fine lattice over the box
double grid_min(const LpProblem& p, double lo, double hi, double step) {
    double best = std::numeric_limits<double>::infinity();
    for (double x = lo; x <= hi + 1e-12; x += step)
        for (double y = lo; y <= hi + 1e-12; y += step) {
            Eigen::Vector2d z(x, y);
            if (((p.A * z - p.b).array() <= 1e-9).all())
                best = std::min(best, p.c.dot(z));
        }
    return best;
}

} // namespace

TEST_CASE("one-variable maximum against a cap") {
    LpProblem p;
    p.A = MatrixXd(2, 1);
    p.A << 1, -1;
    p.b = VectorXd(2);
    p.b << 3, 10; // x <= 3, x >= -10
    p.c = VectorXd(1);
    p.c << -1; // maximize x

    LpSolution sol = lp_solve(p);
    REQUIRE(sol.status == LpStatus::optimal);
    CHECK(sol.z[0] == doctest::Approx(3.0).epsilon(1e-7));
    CHECK(sol.obj == doctest::Approx(-3.0).epsilon(1e-7));
    // the binding row's multiplier carries the whole gradient
    CHECK(sol.y[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(sol.y[1] == doctest::Approx(0.0));
}

TEST_CASE("degenerate objective resolves lexicographically") {
    LpProblem p = box2(0, 1, 0, 1);
    p.A.conservativeResize(5, 2);
    p.A.row(4) << -1, -1; // x + y >= 1
    p.b.conservativeResize(5);
    p.b[4] = -1;
    p.c = VectorXd(2);
    p.c << 1, 1; // every point of the facet x + y = 1 is optimal

    LpSolution sol = lp_solve_lex_min(p);
    REQUIRE(sol.status == LpStatus::optimal);
    CHECK(sol.z[0] == doctest::Approx(0.0));
    CHECK(sol.z[1] == doctest::Approx(1.0));

    // plain solve finds the same objective somewhere on the facet
    LpSolution any = lp_solve(p);
    REQUIRE(any.status == LpStatus::optimal);
    CHECK(any.obj == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("infeasible rows produce a named certificate") {
    LpProblem p;
    p.A = MatrixXd(2, 1);
    p.A << 1, -1;
    p.b = VectorXd(2);
    p.b << 1, -2; // x <= 1 and x >= 2
    p.c = VectorXd::Zero(1);
    p.row_name = {"ceiling", "floor"};

    LpSolution sol = lp_solve(p);
    CHECK(sol.status == LpStatus::infeasible);
    CHECK(!sol.certificate.empty());
    bool named = sol.certificate.find("ceiling") != std::string::npos ||
                 sol.certificate.find("floor") != std::string::npos;
    CHECK(named);
}

TEST_CASE("random dense problems match a lattice search") {
    std::mt19937 rng(81);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);

    int solved = 0;
    for (int trial = 0; trial < 25; ++trial) {
        LpProblem p = box2(-1, 1, -1, 1);
        int extra = 2 + int(rng() % 3);
        p.A.conservativeResize(4 + extra, 2);
        p.b.conservativeResize(4 + extra);
        for (int r = 0; r < extra; ++r) {
            p.A.row(4 + r) << coef(rng), coef(rng);
            p.b[4 + r] = coef(rng) + 2.5; // keeps a chunk of the box feasible
        }
        p.c = VectorXd(2);
        p.c << coef(rng), coef(rng);

        LpSolution sol = lp_solve(p);
        REQUIRE(sol.status == LpStatus::optimal);
        ++solved;

        // primal feasible, never worse than any lattice point
        CHECK(((p.A * sol.z - p.b).array() <= 1e-6).all());
        double brute = grid_min(p, -1.0, 1.0, 1.0 / 256);
        CHECK(sol.obj <= brute + 1e-4);

        // and exactly optimal by the KKT certificate
        CHECK((p.A.transpose() * sol.y + p.c).lpNorm<Eigen::Infinity>() <= 1e-6);
        CHECK(sol.y.minCoeff() >= -1e-9);
        VectorXd slack = p.b - p.A * sol.z;
        CHECK(std::abs(sol.y.dot(slack)) <= 1e-5);
    }
    CHECK(solved == 25);
}

TEST_CASE("duality holds on random feasible problems") {
    std::mt19937 rng(82);
    std::uniform_real_distribution<double> coef(-1.5, 1.5);

    for (int trial = 0; trial < 15; ++trial) {
        LpProblem p = box2(-2, 2, -2, 2);
        p.c = VectorXd(2);
        p.c << coef(rng), coef(rng);

        LpSolution sol = lp_solve(p);
        REQUIRE(sol.status == LpStatus::optimal);
        // stationarity A'y = -c and complementary slackness
        CHECK((p.A.transpose() * sol.y + p.c).lpNorm<Eigen::Infinity>() <= 1e-6);
        CHECK(sol.y.minCoeff() >= -1e-9);
        for (int r = 0; r < p.A.rows(); ++r) {
            double slack = p.b[r] - p.A.row(r).dot(sol.z);
            CHECK(std::abs(sol.y[r] * slack) <= 1e-5);
        }
    }
}

TEST_CASE("lexicographic tie-break on a three-variable face") {
    // min sum z over 0 <= z <= 1 with sum z >= 1: the whole face sum z = 1
    // ties, so the lexicographic rule must push weight onto the last entry
    LpProblem p;
    p.A = MatrixXd(7, 3);
    p.A.topRows(3) = -MatrixXd::Identity(3, 3);
    p.A.middleRows(3, 3) = MatrixXd::Identity(3, 3);
    p.A.row(6) = -MatrixXd::Ones(1, 3);
    p.b = VectorXd(7);
    p.b << 0, 0, 0, 1, 1, 1, -1;
    p.c = VectorXd::Ones(3);

    LpSolution sol = lp_solve_lex_min(p);
    REQUIRE(sol.status == LpStatus::optimal);
    CHECK(sol.z[0] == doctest::Approx(0.0));
    CHECK(sol.z[1] == doctest::Approx(0.0));
    CHECK(sol.z[2] == doctest::Approx(1.0));
    CHECK(sol.obj == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("empty constraint set is rejected or unbounded") {
    LpProblem p;
    p.A = MatrixXd(0, 2);
    p.b = VectorXd(0);
    p.c = VectorXd(2);
    p.c << 1.0, 0.0;
    LpSolution sol = lp_solve(p);
    CHECK(sol.status == LpStatus::unbounded);
}
