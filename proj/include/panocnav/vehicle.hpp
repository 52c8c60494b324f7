#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace panocnav {

struct VehicleState {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;

    Eigen::Vector3d vec() const { return {x, y, theta}; }
    static VehicleState from_vec(const Eigen::Vector3d& v) { return {v[0], v[1], v[2]}; }
};

/// bicycle:  u = (v, delta_f)       (velocity, front steering angle)
/// trailer:  u = (u_x, u_y)         (towing-point velocity reference)
using ControlInput = Eigen::Vector2d;

enum class VehicleKind { Bicycle, Trailer };

VehicleKind vehicle_kind_from_string(const std::string& name);
std::string to_string(VehicleKind kind);

struct VehicleModel {
    VehicleKind kind = VehicleKind::Bicycle;
    double wheelbase = 1.0;  // bicycle: axle distance; trailer: hitch distance

    VehicleModel() = default;
    VehicleModel(VehicleKind k, double length);
};

/// Stacked control inputs u_0..u_{N-1}, the decision variable of the
/// single-shooting problem, stored as one flat 2N vector.
class ControlSequence {
public:
    ControlSequence() = default;
    explicit ControlSequence(int horizon)
        : horizon_(horizon), data_(Eigen::VectorXd::Zero(2 * horizon)) {
        if (horizon < 1) throw std::invalid_argument("horizon must be positive");
    }
    ControlSequence(int horizon, const Eigen::VectorXd& stacked)
        : horizon_(horizon), data_(stacked) {
        if (stacked.size() != 2 * horizon)
            throw std::invalid_argument("control vector has wrong length");
    }

    int horizon() const { return horizon_; }
    const Eigen::VectorXd& stacked() const { return data_; }
    Eigen::VectorXd& stacked() { return data_; }

    ControlInput input(int k) const { return data_.segment<2>(2 * k); }
    void set_input(int k, const ControlInput& u) { data_.segment<2>(2 * k) = u; }

private:
    int horizon_ = 0;
    Eigen::VectorXd data_;
};

/// f(q, u) of the continuous-time model.
Eigen::Vector3d continuous_dynamics(const VehicleModel& model, const VehicleState& q,
                                    const ControlInput& u);

/// df/dq (3x3) and df/du (3x2) of the continuous-time model.
void dynamics_jacobians(const VehicleModel& model, const VehicleState& q,
                        const ControlInput& u, Eigen::Matrix3d& dfdq,
                        Eigen::Matrix<double, 3, 2>& dfdu);

/// One classical RK4 step with the input held constant.
VehicleState rk4_step(const VehicleModel& model, const VehicleState& q,
                      const ControlInput& u, double ts);

/// Exact Jacobians of the discrete RK4 map, obtained by differentiating the
/// four-stage scheme itself.
void rk4_step_jacobians(const VehicleModel& model, const VehicleState& q,
                        const ControlInput& u, double ts, Eigen::Matrix3d& dq,
                        Eigen::Matrix<double, 3, 2>& du);

/// Forward single-shooting rollout; returns F_0..F_N with F_0 = q0.
std::vector<VehicleState> rollout(const VehicleModel& model, const VehicleState& q0,
                                  const ControlSequence& controls, double ts);

/// Reverse adjoint sweep through the RK4 recursion. state_grads[k] is the
/// partial derivative of the total objective with respect to F_k holding the
/// other states fixed (N+1 entries), input_grads[k] likewise for u_k (N
/// entries). Returns the exact total derivative with respect to the stacked
/// controls.
Eigen::VectorXd rollout_adjoint(const VehicleModel& model,
                                const std::vector<VehicleState>& states,
                                const ControlSequence& controls, double ts,
                                const std::vector<Eigen::Vector3d>& state_grads,
                                const std::vector<Eigen::Vector2d>& input_grads);

/// Convenience overload that recomputes the rollout internally.
Eigen::VectorXd rollout_adjoint(const VehicleModel& model, const VehicleState& q0,
                                const ControlSequence& controls, double ts,
                                const std::vector<Eigen::Vector3d>& state_grads,
                                const std::vector<Eigen::Vector2d>& input_grads);

}  // namespace panocnav
