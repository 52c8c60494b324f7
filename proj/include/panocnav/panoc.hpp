#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace panocnav {

/// Componentwise bounds of the stacked input set U^N.
struct Box {
    Eigen::VectorXd lower, upper;

    Box() = default;
    Box(Eigen::VectorXd lo, Eigen::VectorXd hi);

    /// Replicates per-stage bounds over the horizon.
    static Box replicate(const Eigen::Vector2d& lo, const Eigen::Vector2d& hi, int horizon);

    Eigen::Index size() const { return lower.size(); }
    bool contains(const Eigen::VectorXd& u, double tol = 0.0) const;
};

Eigen::VectorXd project_box(const Eigen::VectorXd& u, const Box& box);

/// R_gamma(u) = (u - P(u - gamma*grad)) / gamma and the projected point.
struct ResidualEval {
    Eigen::VectorXd residual;
    Eigen::VectorXd projected;
};
ResidualEval fixed_point_residual(const Eigen::VectorXd& u, const Eigen::VectorXd& grad,
                                  double gamma, const Box& box);

/// Forward-backward envelope
///   phi_gamma(u) = f(u) - gamma/2 |grad|^2 + 1/(2 gamma) dist^2(u - gamma*grad, U)
double forward_backward_envelope(double value, const Eigen::VectorXd& grad,
                                 const Eigen::VectorXd& u, double gamma, const Box& box);

/// Limited-memory BFGS buffer operating on fixed-point residuals. Pairs with
/// nonpositive curvature are rejected at insertion.
class LbfgsBuffer {
public:
    explicit LbfgsBuffer(int memory = 10);

    /// Returns false when the pair is rejected by the curvature guard.
    bool push(const Eigen::VectorXd& s, const Eigen::VectorXd& y);

    /// Two-loop recursion for d = -H r; with empty memory d = -r.
    Eigen::VectorXd direction(const Eigen::VectorXd& r) const;

    void clear();
    int size() const { return count_; }

private:
    int memory_;
    int count_ = 0;
    int head_ = 0;  // slot of the most recent pair
    std::vector<Eigen::VectorXd> s_, y_;
    std::vector<double> sy_;
};

struct PanocConfig {
    double tolerance = 1e-3;           // on the infinity norm of R_gamma
    int max_iterations = 500;
    int lbfgs_memory = 10;
    double initial_lipschitz = 0.0;    // <= 0 requests the finite-difference estimate
    int max_linesearch_halvings = 10;
    bool check_fbe_descent = true;     // count descent-condition violations

    /// Optional per-iteration observer for tests and tracing.
    struct IterationInfo {
        int iteration;
        double residual_inf;
        double gamma;
        double objective;
    };
    std::function<void(const IterationInfo&)> observer;
};

enum class PanocStatus { Converged, MaxIterations, LineSearchExhausted };

std::string to_string(PanocStatus status);

struct SolveReport {
    PanocStatus status = PanocStatus::MaxIterations;
    double residual = 0.0;  // |R_gamma|_inf re-evaluated at the returned point
    int iterations = 0;
    double gamma = 0.0;
    double objective = 0.0;
    double wall_time_ms = 0.0;
    long objective_evals = 0;
    int lipschitz_updates = 0;
    int linesearch_fallbacks = 0;
    int fbe_descent_violations = 0;
    double fbe_worst_excess = 0.0;  // largest positive phi(u+) - (phi(u) - sigma|r|^2)
};

/// Objective callback: returns f(u) and fills *grad with the gradient when
/// grad is non-null. Must be deterministic and reentrant.
using ObjectiveFn = std::function<double(const Eigen::VectorXd& u, Eigen::VectorXd* grad)>;

struct PanocResult {
    Eigen::VectorXd solution;  // always feasible (a projected point)
    SolveReport report;
};

/// PANOC: projected-gradient steps averaged with L-BFGS directions on the
/// fixed-point residual, globalized by a line search on the forward-backward
/// envelope, with the Lipschitz estimate doubled whenever the local quadratic
/// upper bound fails.
PanocResult panoc_solve(const ObjectiveFn& objective, const Box& box,
                        const Eigen::VectorXd& u0, const PanocConfig& config);

}  // namespace panocnav
