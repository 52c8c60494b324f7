#include "panocnav/penalty.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace panocnav {

double PenaltyConfig::inner_tolerance(int outer_index) const {
    double tau = tau_schedule ? tau_schedule(outer_index)
                              : 0.1 * std::pow(0.25, outer_index);
    return std::max(tau, tau_star);
}

void PenaltyConfig::validate() const {
    if (mu0 <= 0.0) throw std::invalid_argument("mu0 must be positive");
    if (omega <= 1.0) throw std::invalid_argument("omega must exceed 1");
    if (eta_star <= 0.0) throw std::invalid_argument("eta_star must be positive");
    if (tau_star <= 0.0) throw std::invalid_argument("tau_star must be positive");
    if (mu_cap < mu0) throw std::invalid_argument("mu_cap must be at least mu0");
    if (max_outer_iterations < 1)
        throw std::invalid_argument("max_outer_iterations must be positive");
}

std::string to_string(PenaltyStatus status) {
    switch (status) {
        case PenaltyStatus::Feasible: return "feasible";
        case PenaltyStatus::CappedInfeasible: return "capped_infeasible";
        case PenaltyStatus::ResidualFail: return "residual_fail";
    }
    return "unknown";
}

PenaltyOutcome penalty_solve(const ProblemSpec& spec, const PenaltyMatrix& mu_init,
                             const ControlSequence& u_init, const PenaltyConfig& config) {
    spec.validate();
    config.validate();
    if (mu_init.rows() != static_cast<Eigen::Index>(spec.obstacles.size()) ||
        mu_init.cols() != spec.horizon)
        throw std::invalid_argument("penalty matrix shape mismatch");
    if ((mu_init.array() < 0.0).any() || (mu_init.array() > config.mu_cap).any())
        throw std::invalid_argument("initial penalty factors must lie in [0, mu_cap]");
    if (u_init.horizon() != spec.horizon)
        throw std::invalid_argument("warm-start horizon mismatch");

    const auto t_start = std::chrono::steady_clock::now();
    const bool has_obstacles = !spec.obstacles.empty();
    const Box box = Box::replicate(spec.input_box.lower, spec.input_box.upper, spec.horizon);

    PenaltyOutcome out;
    out.mu = mu_init;
    out.controls = u_init;

    ControlSequence best_controls = u_init;
    double best_violation = std::numeric_limits<double>::infinity();

    for (int outer = 0; outer < config.max_outer_iterations; ++outer) {
        out.outer_iterations = outer + 1;

        PanocConfig inner = config.panoc;
        // With no penalty terms the problem never changes between outer
        // iterations, so solve directly at the final tolerance.
        inner.tolerance = has_obstacles ? config.inner_tolerance(outer) : config.tau_star;

        ObjectiveFn objective = [&](const Eigen::VectorXd& u, Eigen::VectorXd* grad) {
            ControlSequence seq(spec.horizon, u);
            if (!grad) return eval_objective(spec, out.mu, seq);
            ObjectiveValueGrad vg = eval_objective_gradient(spec, out.mu, seq);
            *grad = std::move(vg.gradient);
            return vg.value;
        };

        PanocResult result = panoc_solve(objective, box, out.controls.stacked(), inner);
        out.controls = ControlSequence(spec.horizon, result.solution);
        out.total_inner_iterations += result.report.iterations;
        out.fbe_descent_violations += result.report.fbe_descent_violations;
        out.final_residual = result.report.residual;
        out.objective_value = result.report.objective;

        ViolationReport violation = max_obstacle_violation(spec, out.controls);
        out.max_violation = violation.overall;
        out.violation_history.push_back(violation.overall);
        if (violation.overall <= best_violation) {
            best_violation = violation.overall;
            best_controls = out.controls;
        }

        const bool residual_ok = result.report.status == PanocStatus::Converged &&
                                 result.report.residual <= config.tau_star;
        if (residual_ok && violation.overall <= config.eta_star) {
            out.status = PenaltyStatus::Feasible;
            break;
        }

        const bool all_capped =
            has_obstacles && (out.mu.array() >= config.mu_cap).all();
        const bool at_final_tolerance = inner.tolerance <= config.tau_star;
        if (all_capped && at_final_tolerance && residual_ok) {
            // Every factor sits at the cap and the inner problem is solved to
            // the final tolerance: further outer iterations cannot change
            // anything.
            out.status = PenaltyStatus::CappedInfeasible;
            break;
        }

        if (outer + 1 < config.max_outer_iterations)
            out.mu = (config.omega * out.mu).cwiseMin(config.mu_cap);
    }

    if (out.status == PenaltyStatus::ResidualFail) {
        out.controls = best_controls;
        out.max_violation = best_violation;
    }

    out.solve_time_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - t_start)
                            .count();
    return out;
}

std::pair<ControlSequence, PenaltyMatrix> shift_warm_start(const ControlSequence& u_prev,
                                                           const PenaltyMatrix& mu_prev) {
    const int N = u_prev.horizon();
    ControlSequence shifted(N);
    for (int k = 0; k + 1 < N; ++k) shifted.set_input(k, u_prev.input(k + 1));
    shifted.set_input(N - 1, ControlInput::Zero());

    PenaltyMatrix mu_shifted(mu_prev.rows(), mu_prev.cols());
    if (mu_prev.cols() > 0) {
        if (mu_prev.cols() > 1)
            mu_shifted.leftCols(mu_prev.cols() - 1) = mu_prev.rightCols(mu_prev.cols() - 1);
        mu_shifted.col(mu_prev.cols() - 1).setOnes();
    }
    return {std::move(shifted), std::move(mu_shifted)};
}

}  // namespace panocnav
