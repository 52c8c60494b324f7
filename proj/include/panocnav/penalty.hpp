#pragma once

#include <functional>
#include <string>
#include <vector>

#include "panocnav/objective.hpp"
#include "panocnav/panoc.hpp"

namespace panocnav {

struct PenaltyConfig {
    double mu0 = 1.0;         // uniform initial penalty factor
    double omega = 10.0;      // update factor, > 1
    double eta_star = 1e-2;   // constraint tolerance on max psi
    double tau_star = 1e-3;   // final residual tolerance
    double mu_cap = 1e4;      // upper bound on every penalty factor
    int max_outer_iterations = 20;
    PanocConfig panoc;        // panoc.tolerance is overridden by the schedule

    /// Inner tolerance for outer iteration k; defaults to
    /// max(tau_star, 0.1 * 0.25^k). Must be nonincreasing toward tau_star.
    std::function<double(int)> tau_schedule;

    double inner_tolerance(int outer_index) const;
    void validate() const;
};

enum class PenaltyStatus { Feasible, CappedInfeasible, ResidualFail };

std::string to_string(PenaltyStatus status);

struct PenaltyOutcome {
    ControlSequence controls;
    PenaltyMatrix mu;
    PenaltyStatus status = PenaltyStatus::ResidualFail;
    double max_violation = 0.0;
    double final_residual = 0.0;
    double objective_value = 0.0;
    int outer_iterations = 0;
    long total_inner_iterations = 0;
    double solve_time_ms = 0.0;
    long fbe_descent_violations = 0;
    std::vector<double> violation_history;  // max violation after each outer solve
};

/// Quadratic penalty method: inner PANOC solves with the scheduled
/// tolerances, multiplying every penalty factor by omega (clamped at the cap)
/// and warm-starting each solve from the previous solution, until the
/// residual and constraint tolerances are met.
PenaltyOutcome penalty_solve(const ProblemSpec& spec, const PenaltyMatrix& mu_init,
                             const ControlSequence& u_init, const PenaltyConfig& config);

/// MPC-step warm start: drop the first input and append zero, drop the
/// first penalty column and append a column of ones.
std::pair<ControlSequence, PenaltyMatrix> shift_warm_start(const ControlSequence& u_prev,
                                                           const PenaltyMatrix& mu_prev);

}  // namespace panocnav
