#pragma once

#include <Eigen/Dense>

#include <vector>

#include "panocnav/obstacle.hpp"
#include "panocnav/vehicle.hpp"

namespace panocnav {

/// Quadratic tracking weights. Q and QN must be symmetric positive
/// semidefinite, R diagonal with strictly positive entries.
struct CostWeights {
    Eigen::Matrix3d Q = Eigen::Vector3d(1.0, 1.0, 0.1).asDiagonal();
    Eigen::Matrix2d R = Eigen::Vector2d(0.1, 0.1).asDiagonal();
    Eigen::Matrix3d QN = Eigen::Vector3d(10.0, 10.0, 1.0).asDiagonal();
    VehicleState q_ref;
    ControlInput u_ref = ControlInput::Zero();

    void validate() const;
};

/// Per-obstacle, per-stage penalty factors mu_{ik}; row i is an obstacle,
/// column k-1 corresponds to stage k (penalties run over stages 1..N).
using PenaltyMatrix = Eigen::MatrixXd;

PenaltyMatrix uniform_penalties(int num_obstacles, int horizon, double value);

struct InputBox {
    ControlInput lower = ControlInput::Constant(-1.0);
    ControlInput upper = ControlInput::Constant(1.0);

    void validate() const;
};

/// A complete single-shooting optimal control problem instance.
struct ProblemSpec {
    VehicleModel model;
    double ts = 0.05;
    int horizon = 10;
    CostWeights weights;
    std::vector<ObstacleSpec> obstacles;
    InputBox input_box;
    VehicleState q0;

    void validate() const;
};

/// Objective of the penalized single-shooting problem:
///   lN(F_N) + sum_{k=0..N-1} lk(F_k, u_k)
///   + 0.5 * sum_{k=1..N} sum_i mu_{ik} psi_i(F_k)^2
/// Obstacle terms act on the position subvector of the state only.
double eval_objective(const ProblemSpec& spec, const PenaltyMatrix& mu,
                      const ControlSequence& controls);

struct ObjectiveValueGrad {
    double value = 0.0;
    Eigen::VectorXd gradient;
};

/// Objective value together with its exact gradient, assembled through the
/// adjoint sweep. The value matches eval_objective bit for bit.
ObjectiveValueGrad eval_objective_gradient(const ProblemSpec& spec,
                                           const PenaltyMatrix& mu,
                                           const ControlSequence& controls);

struct ViolationReport {
    std::vector<double> per_stage;  // max_i psi_i(z_k) for k = 1..N
    double overall = 0.0;
};

/// Stage-wise and overall maxima of the (enlarged) obstacle functions along
/// the predicted trajectory; the norm used by the penalty-loop stop test.
ViolationReport max_obstacle_violation(const ProblemSpec& spec,
                                       const ControlSequence& controls);
ViolationReport max_obstacle_violation(const ProblemSpec& spec,
                                       const std::vector<VehicleState>& states);

/// Same maxima against the physical (non-enlarged) obstacle sets.
ViolationReport max_true_violation(const ProblemSpec& spec,
                                   const std::vector<VehicleState>& states);

}  // namespace panocnav
