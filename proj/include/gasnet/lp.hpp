#pragma once

#include "gasnet/types.hpp"

#include <string>
#include <vector>

namespace gasnet {

// min c'z subject to A z <= b. Bounds are ordinary rows. Optional row names
// feed infeasibility certificates.
struct LpProblem {
    MatrixXd A;
    VectorXd b, c;
    std::vector<std::string> row_name; // empty or one per row
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

struct LpSolution {
    LpStatus status = LpStatus::iteration_limit;
    VectorXd z, y; // primal; dual multipliers of the rows (y >= 0)
    double obj = 0;
    int iterations = 0;
    std::string certificate; // most violated row when infeasible
};

struct LpOptions {
    double tol = 1e-9;
    int max_iterations = 100;
};

LpSolution lp_solve(const LpProblem& p, const LpOptions& opt = {});

// Among the epsilon-optimal points of the LP, picks the coordinatewise
// lexicographically smallest z by pinning coordinates one at a time.
LpSolution lp_solve_lex_min(const LpProblem& p, const LpOptions& opt = {});

} // namespace gasnet
