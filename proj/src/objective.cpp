#include "panocnav/objective.hpp"

#include <cmath>
#include <stdexcept>

namespace panocnav {

void CostWeights::validate() const {
    auto check_psd = [](const Eigen::Matrix3d& M, const char* name) {
        if (!M.isApprox(M.transpose(), 1e-12))
            throw std::invalid_argument(std::string(name) + " must be symmetric");
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(M);
        if (eig.eigenvalues().minCoeff() < -1e-10)
            throw std::invalid_argument(std::string(name) + " must be positive semidefinite");
    };
    check_psd(Q, "Q");
    check_psd(QN, "QN");
    if (R(0, 1) != 0.0 || R(1, 0) != 0.0)
        throw std::invalid_argument("R must be diagonal");
    if (R(0, 0) <= 0.0 || R(1, 1) <= 0.0)
        throw std::invalid_argument("R must have strictly positive diagonal entries");
}

void InputBox::validate() const {
    if (!(lower.array() <= upper.array()).all())
        throw std::invalid_argument("input bounds must satisfy lower <= upper");
}

void ProblemSpec::validate() const {
    if (ts <= 0.0) throw std::invalid_argument("sampling time must be positive");
    if (horizon < 1) throw std::invalid_argument("horizon must be positive");
    if (model.wheelbase <= 0.0) throw std::invalid_argument("vehicle length must be positive");
    weights.validate();
    input_box.validate();
    for (const auto& ob : obstacles)
        if (ob.constraints.empty())
            throw std::invalid_argument("obstacle without constraints");
}

PenaltyMatrix uniform_penalties(int num_obstacles, int horizon, double value) {
    return PenaltyMatrix::Constant(num_obstacles, horizon, value);
}

namespace {

void check_dimensions(const ProblemSpec& spec, const PenaltyMatrix& mu,
                      const ControlSequence& controls) {
    if (controls.horizon() != spec.horizon)
        throw std::invalid_argument("control sequence horizon mismatch");
    if (mu.rows() != static_cast<Eigen::Index>(spec.obstacles.size()) ||
        mu.cols() != spec.horizon)
        throw std::invalid_argument("penalty matrix shape mismatch");
    if ((mu.array() < 0.0).any())
        throw std::invalid_argument("penalty factors must be nonnegative");
}

// One shared evaluation pass so the value accumulation is identical whether
// or not the gradient is requested.
double eval_impl(const ProblemSpec& spec, const PenaltyMatrix& mu,
                 const ControlSequence& controls, Eigen::VectorXd* gradient) {
    const int N = spec.horizon;
    const auto& w = spec.weights;
    const Eigen::Vector3d q_ref = w.q_ref.vec();

    std::vector<VehicleState> states = rollout(spec.model, spec.q0, controls, spec.ts);

    std::vector<Eigen::Vector3d> state_grads;
    std::vector<Eigen::Vector2d> input_grads;
    if (gradient) {
        state_grads.assign(N + 1, Eigen::Vector3d::Zero());
        input_grads.assign(N, Eigen::Vector2d::Zero());
    }

    double total = 0.0;
    for (int k = 0; k < N; ++k) {
        Eigen::Vector3d dq = states[k].vec() - q_ref;
        Eigen::Vector2d du = controls.input(k) - w.u_ref;
        total += dq.dot(w.Q * dq) + du.dot(w.R * du);
        if (gradient) {
            if (k > 0) state_grads[k] += 2.0 * (w.Q * dq);
            input_grads[k] = 2.0 * (w.R * du);
        }
    }
    for (int k = 1; k <= N; ++k) {
        Position z{states[k].x, states[k].y};
        for (std::size_t i = 0; i < spec.obstacles.size(); ++i) {
            double factor = mu(static_cast<Eigen::Index>(i), k - 1);
            if (factor == 0.0) continue;
            PenaltyEval pe = eval_penalty_gradient(spec.obstacles[i], z, factor);
            total += pe.value;
            if (gradient) {
                state_grads[k][0] += pe.grad_x;
                state_grads[k][1] += pe.grad_y;
            }
        }
    }
    {
        Eigen::Vector3d dq = states[N].vec() - q_ref;
        total += dq.dot(w.QN * dq);
        if (gradient) state_grads[N] += 2.0 * (w.QN * dq);
    }
    if (!std::isfinite(total))
        throw EvaluationError("objective evaluated to a non-finite value");

    if (gradient)
        *gradient = rollout_adjoint(spec.model, states, controls, spec.ts, state_grads,
                                    input_grads);
    return total;
}

}  // namespace

double eval_objective(const ProblemSpec& spec, const PenaltyMatrix& mu,
                      const ControlSequence& controls) {
    check_dimensions(spec, mu, controls);
    return eval_impl(spec, mu, controls, nullptr);
}

ObjectiveValueGrad eval_objective_gradient(const ProblemSpec& spec,
                                           const PenaltyMatrix& mu,
                                           const ControlSequence& controls) {
    check_dimensions(spec, mu, controls);
    ObjectiveValueGrad out;
    out.value = eval_impl(spec, mu, controls, &out.gradient);
    return out;
}

namespace {

ViolationReport violation_impl(const std::vector<ObstacleSpec>& obstacles,
                               const std::vector<VehicleState>& states, bool use_true) {
    ViolationReport report;
    const int N = static_cast<int>(states.size()) - 1;
    report.per_stage.assign(N, 0.0);
    for (int k = 1; k <= N; ++k) {
        Position z{states[k].x, states[k].y};
        double stage_max = 0.0;
        for (const auto& ob : obstacles) {
            double psi = use_true ? eval_psi_true(ob, z) : eval_psi(ob, z);
            stage_max = std::max(stage_max, psi);
        }
        report.per_stage[k - 1] = stage_max;
        report.overall = std::max(report.overall, stage_max);
    }
    return report;
}

}  // namespace

ViolationReport max_obstacle_violation(const ProblemSpec& spec,
                                       const ControlSequence& controls) {
    return violation_impl(spec.obstacles, rollout(spec.model, spec.q0, controls, spec.ts),
                          false);
}

ViolationReport max_obstacle_violation(const ProblemSpec& spec,
                                       const std::vector<VehicleState>& states) {
    return violation_impl(spec.obstacles, states, false);
}

ViolationReport max_true_violation(const ProblemSpec& spec,
                                   const std::vector<VehicleState>& states) {
    return violation_impl(spec.obstacles, states, true);
}

}  // namespace panocnav
