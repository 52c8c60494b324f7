#include "panocnav/vehicle.hpp"

#include <cmath>
#include <stdexcept>

namespace panocnav {

VehicleKind vehicle_kind_from_string(const std::string& name) {
    if (name == "bicycle") return VehicleKind::Bicycle;
    if (name == "trailer") return VehicleKind::Trailer;
    throw std::invalid_argument("unknown vehicle kind '" + name + "'");
}

std::string to_string(VehicleKind kind) {
    return kind == VehicleKind::Bicycle ? "bicycle" : "trailer";
}

VehicleModel::VehicleModel(VehicleKind k, double length) : kind(k), wheelbase(length) {
    if (length <= 0.0) throw std::invalid_argument("vehicle length must be positive");
}

Eigen::Vector3d continuous_dynamics(const VehicleModel& model, const VehicleState& q,
                                    const ControlInput& u) {
    Eigen::Vector3d dq;
    double L = model.wheelbase;
    if (model.kind == VehicleKind::Bicycle) {
        double v = u[0], delta = u[1];
        dq[0] = v * std::cos(q.theta);
        dq[1] = v * std::sin(q.theta);
        dq[2] = v / L * std::tan(delta);
    } else {
        double ux = u[0], uy = u[1];
        double s = std::sin(q.theta), c = std::cos(q.theta);
        double theta_dot = (uy * c - ux * s) / L;
        dq[0] = ux + L * s * theta_dot;
        dq[1] = uy - L * c * theta_dot;
        dq[2] = theta_dot;
    }
    return dq;
}

void dynamics_jacobians(const VehicleModel& model, const VehicleState& q,
                        const ControlInput& u, Eigen::Matrix3d& dfdq,
                        Eigen::Matrix<double, 3, 2>& dfdu) {
    dfdq.setZero();
    dfdu.setZero();
    double L = model.wheelbase;
    double s = std::sin(q.theta), c = std::cos(q.theta);
    if (model.kind == VehicleKind::Bicycle) {
        double v = u[0], delta = u[1];
        double t = std::tan(delta);
        dfdq(0, 2) = -v * s;
        dfdq(1, 2) = v * c;
        dfdu(0, 0) = c;
        dfdu(1, 0) = s;
        dfdu(2, 0) = t / L;
        dfdu(2, 1) = v / (L * std::cos(delta) * std::cos(delta));
    } else {
        double ux = u[0], uy = u[1];
        double w = (uy * c - ux * s) / L;
        double dw_dth = (-uy * s - ux * c) / L;
        double dw_dux = -s / L;
        double dw_duy = c / L;
        // xdot = ux + L s w, ydot = uy - L c w, thetadot = w
        dfdq(0, 2) = L * c * w + L * s * dw_dth;
        dfdq(1, 2) = L * s * w - L * c * dw_dth;
        dfdq(2, 2) = dw_dth;
        dfdu(0, 0) = 1.0 + L * s * dw_dux;
        dfdu(0, 1) = L * s * dw_duy;
        dfdu(1, 0) = -L * c * dw_dux;
        dfdu(1, 1) = 1.0 - L * c * dw_duy;
        dfdu(2, 0) = dw_dux;
        dfdu(2, 1) = dw_duy;
    }
}

VehicleState rk4_step(const VehicleModel& model, const VehicleState& q,
                      const ControlInput& u, double ts) {
    if (ts <= 0.0) throw std::invalid_argument("sampling time must be positive");
    Eigen::Vector3d q0 = q.vec();
    Eigen::Vector3d k1 = continuous_dynamics(model, q, u);
    Eigen::Vector3d k2 =
        continuous_dynamics(model, VehicleState::from_vec(q0 + 0.5 * ts * k1), u);
    Eigen::Vector3d k3 =
        continuous_dynamics(model, VehicleState::from_vec(q0 + 0.5 * ts * k2), u);
    Eigen::Vector3d k4 =
        continuous_dynamics(model, VehicleState::from_vec(q0 + ts * k3), u);
    return VehicleState::from_vec(q0 + ts / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

void rk4_step_jacobians(const VehicleModel& model, const VehicleState& q,
                        const ControlInput& u, double ts, Eigen::Matrix3d& dq,
                        Eigen::Matrix<double, 3, 2>& du) {
    using Mat32 = Eigen::Matrix<double, 3, 2>;
    const Eigen::Vector3d q0 = q.vec();
    const Eigen::Matrix3d I = Eigen::Matrix3d::Identity();

    Eigen::Vector3d k1 = continuous_dynamics(model, q, u);
    VehicleState q2 = VehicleState::from_vec(q0 + 0.5 * ts * k1);
    Eigen::Vector3d k2 = continuous_dynamics(model, q2, u);
    VehicleState q3 = VehicleState::from_vec(q0 + 0.5 * ts * k2);
    Eigen::Vector3d k3 = continuous_dynamics(model, q3, u);
    VehicleState q4 = VehicleState::from_vec(q0 + ts * k3);

    Eigen::Matrix3d A1, A2, A3, A4;
    Mat32 B1, B2, B3, B4;
    dynamics_jacobians(model, q, u, A1, B1);
    dynamics_jacobians(model, q2, u, A2, B2);
    dynamics_jacobians(model, q3, u, A3, B3);
    dynamics_jacobians(model, q4, u, A4, B4);

    Eigen::Matrix3d K1q = A1;
    Eigen::Matrix3d K2q = A2 * (I + 0.5 * ts * K1q);
    Eigen::Matrix3d K3q = A3 * (I + 0.5 * ts * K2q);
    Eigen::Matrix3d K4q = A4 * (I + ts * K3q);
    dq = I + ts / 6.0 * (K1q + 2.0 * K2q + 2.0 * K3q + K4q);

    Mat32 K1u = B1;
    Mat32 K2u = B2 + 0.5 * ts * A2 * K1u;
    Mat32 K3u = B3 + 0.5 * ts * A3 * K2u;
    Mat32 K4u = B4 + ts * A4 * K3u;
    du = ts / 6.0 * (K1u + 2.0 * K2u + 2.0 * K3u + K4u);
}

std::vector<VehicleState> rollout(const VehicleModel& model, const VehicleState& q0,
                                  const ControlSequence& controls, double ts) {
    std::vector<VehicleState> states;
    states.reserve(controls.horizon() + 1);
    states.push_back(q0);
    for (int k = 0; k < controls.horizon(); ++k)
        states.push_back(rk4_step(model, states.back(), controls.input(k), ts));
    return states;
}

Eigen::VectorXd rollout_adjoint(const VehicleModel& model,
                                const std::vector<VehicleState>& states,
                                const ControlSequence& controls, double ts,
                                const std::vector<Eigen::Vector3d>& state_grads,
                                const std::vector<Eigen::Vector2d>& input_grads) {
    const int N = controls.horizon();
    if (static_cast<int>(states.size()) != N + 1 ||
        static_cast<int>(state_grads.size()) != N + 1 ||
        static_cast<int>(input_grads.size()) != N)
        throw std::invalid_argument("rollout_adjoint: dimension mismatch");

    Eigen::VectorXd grad(2 * N);
    Eigen::Vector3d lambda = state_grads[N];
    Eigen::Matrix3d dq;
    Eigen::Matrix<double, 3, 2> du;
    for (int k = N - 1; k >= 0; --k) {
        rk4_step_jacobians(model, states[k], controls.input(k), ts, dq, du);
        grad.segment<2>(2 * k) = input_grads[k] + du.transpose() * lambda;
        lambda = state_grads[k] + dq.transpose() * lambda;
    }
    return grad;
}

Eigen::VectorXd rollout_adjoint(const VehicleModel& model, const VehicleState& q0,
                                const ControlSequence& controls, double ts,
                                const std::vector<Eigen::Vector3d>& state_grads,
                                const std::vector<Eigen::Vector2d>& input_grads) {
    return rollout_adjoint(model, rollout(model, q0, controls, ts), controls, ts,
                           state_grads, input_grads);
}

}  // namespace panocnav
