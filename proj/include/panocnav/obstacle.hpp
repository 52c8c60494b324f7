#pragma once

#include <string>
#include <vector>

#include "panocnav/expr.hpp"

namespace panocnav {

struct Position {
    double x = 0.0;
    double y = 0.0;
};

/// Thrown by apply_enlargement for constraint families without an automatic
/// offset rule (anything that is not affine or a definite quadratic).
class UnsupportedEnlargement : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An obstacle is the set {z : h_i(z) > 0 for all i}. Two constraint lists
/// are kept: `constraints` describe the virtually enlarged set the solver
/// penalizes, `true_constraints` the physical set used for safety checks.
/// The enlarged set must contain the true set.
struct ObstacleSpec {
    std::vector<ConstraintExpr> constraints;
    std::vector<ConstraintExpr> true_constraints;
    double enlargement = 0.0;
    std::string label;

    /// Builds a spec from the physical constraints and grows the solver set
    /// by `margin` via apply_enlargement.
    static ObstacleSpec from_true(std::vector<ConstraintExpr> true_constraints,
                                  double margin, std::string label = {});

    /// Builds a spec with both sets given explicitly (general expressions
    /// where no automatic offset rule exists).
    static ObstacleSpec from_pair(std::vector<ConstraintExpr> enlarged,
                                  std::vector<ConstraintExpr> true_constraints,
                                  std::string label = {});
};

/// Product of hinges over an arbitrary constraint list.
double eval_psi(const std::vector<ConstraintExpr>& constraints, const Position& z);

/// psi of the enlarged set (what the solver penalizes).
double eval_psi(const ObstacleSpec& obstacle, const Position& z);

/// psi of the physical set (what safety checks use).
double eval_psi_true(const ObstacleSpec& obstacle, const Position& z);

struct PenaltyEval {
    double value = 0.0;  // 0.5 * mu * psi^2
    double grad_x = 0.0;
    double grad_y = 0.0;
};

/// Quadratic obstacle penalty 0.5*mu*psi(z)^2 of the enlarged set and its
/// exact gradient, mu * sum_i [h_i]_+ prod_{j!=i} [h_j]_+^2 grad h_i.
PenaltyEval eval_penalty_gradient(const ObstacleSpec& obstacle, const Position& z, double mu);

/// Returns a copy of `obstacle` whose solver constraints are the true
/// constraints offset outward by `obstacle.enlargement`:
///   - affine b - a'z: constant term grows by margin * |a|
///   - definite quadratics (discs, ellipsoids): each semi-axis grows by margin
/// Throws UnsupportedEnlargement for other families when the margin is
/// nonzero. A zero margin returns the spec unchanged.
ObstacleSpec apply_enlargement(const ObstacleSpec& obstacle);

}  // namespace panocnav
