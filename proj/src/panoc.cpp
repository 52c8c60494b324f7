#include "panocnav/panoc.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace panocnav {

Box::Box(Eigen::VectorXd lo, Eigen::VectorXd hi)
    : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() != upper.size())
        throw std::invalid_argument("box bounds have different lengths");
    if (!(lower.array() <= upper.array()).all())
        throw std::invalid_argument("box bounds must satisfy lower <= upper");
}

Box Box::replicate(const Eigen::Vector2d& lo, const Eigen::Vector2d& hi, int horizon) {
    Eigen::VectorXd lower(2 * horizon), upper(2 * horizon);
    for (int k = 0; k < horizon; ++k) {
        lower.segment<2>(2 * k) = lo;
        upper.segment<2>(2 * k) = hi;
    }
    return Box(std::move(lower), std::move(upper));
}

bool Box::contains(const Eigen::VectorXd& u, double tol) const {
    return (u.array() >= lower.array() - tol).all() &&
           (u.array() <= upper.array() + tol).all();
}

Eigen::VectorXd project_box(const Eigen::VectorXd& u, const Box& box) {
    return u.cwiseMax(box.lower).cwiseMin(box.upper);
}

ResidualEval fixed_point_residual(const Eigen::VectorXd& u, const Eigen::VectorXd& grad,
                                  double gamma, const Box& box) {
    if (gamma <= 0.0) throw std::invalid_argument("gamma must be positive");
    ResidualEval out;
    out.projected = project_box(u - gamma * grad, box);
    out.residual = (u - out.projected) / gamma;
    return out;
}

double forward_backward_envelope(double value, const Eigen::VectorXd& grad,
                                 const Eigen::VectorXd& u, double gamma, const Box& box) {
    if (gamma <= 0.0) throw std::invalid_argument("gamma must be positive");
    Eigen::VectorXd step = u - gamma * grad;
    double dist2 = (step - project_box(step, box)).squaredNorm();
    return value - 0.5 * gamma * grad.squaredNorm() + dist2 / (2.0 * gamma);
}

// ---------------------------------------------------------------------------
// L-BFGS two-loop recursion on residual pairs
// ---------------------------------------------------------------------------

LbfgsBuffer::LbfgsBuffer(int memory) : memory_(memory) {
    if (memory < 1) throw std::invalid_argument("L-BFGS memory must be positive");
    s_.resize(memory_);
    y_.resize(memory_);
    sy_.resize(memory_);
}

bool LbfgsBuffer::push(const Eigen::VectorXd& s, const Eigen::VectorXd& y) {
    double sy = s.dot(y);
    if (sy <= 1e-12 * s.norm() * y.norm()) return false;
    head_ = (head_ + 1) % memory_;
    s_[head_] = s;
    y_[head_] = y;
    sy_[head_] = sy;
    count_ = std::min(count_ + 1, memory_);
    return true;
}

Eigen::VectorXd LbfgsBuffer::direction(const Eigen::VectorXd& r) const {
    Eigen::VectorXd q = r;
    if (count_ == 0) return -q;

    std::vector<double> alpha(count_);
    for (int j = 0; j < count_; ++j) {
        int i = (head_ - j + memory_) % memory_;
        alpha[j] = s_[i].dot(q) / sy_[i];
        q -= alpha[j] * y_[i];
    }
    q *= sy_[head_] / y_[head_].squaredNorm();
    for (int j = count_ - 1; j >= 0; --j) {
        int i = (head_ - j + memory_) % memory_;
        double beta = y_[i].dot(q) / sy_[i];
        q += (alpha[j] - beta) * s_[i];
    }
    return -q;
}

void LbfgsBuffer::clear() {
    count_ = 0;
    head_ = 0;
}

// ---------------------------------------------------------------------------
// PANOC main loop
// ---------------------------------------------------------------------------

std::string to_string(PanocStatus status) {
    switch (status) {
        case PanocStatus::Converged: return "converged";
        case PanocStatus::MaxIterations: return "max_iterations";
        case PanocStatus::LineSearchExhausted: return "line_search_exhausted";
    }
    return "unknown";
}

namespace {

double estimate_lipschitz(const ObjectiveFn& objective, const Eigen::VectorXd& u0,
                          const Eigen::VectorXd& g0, long& evals) {
    const double delta = 1e-6;
    Eigen::VectorXd perturbed = u0.array() + delta;
    Eigen::VectorXd g1(u0.size());
    objective(perturbed, &g1);
    ++evals;
    double L = (g1 - g0).norm() / (delta * std::sqrt(static_cast<double>(u0.size())));
    return std::max(L, 1e-10);
}

}  // namespace

PanocResult panoc_solve(const ObjectiveFn& objective, const Box& box,
                        const Eigen::VectorXd& u0, const PanocConfig& config) {
    if (config.tolerance <= 0.0) throw std::invalid_argument("tolerance must be positive");
    if (config.max_iterations < 1)
        throw std::invalid_argument("max_iterations must be positive");
    if (u0.size() != box.size()) throw std::invalid_argument("u0/box size mismatch");
    if (!u0.allFinite()) throw std::invalid_argument("u0 must be finite");

    const auto t_start = std::chrono::steady_clock::now();
    SolveReport report;

    Eigen::VectorXd u = u0;
    Eigen::VectorXd g(u.size());
    double f = objective(u, &g);
    ++report.objective_evals;

    double L = config.initial_lipschitz > 0.0
                   ? config.initial_lipschitz
                   : estimate_lipschitz(objective, u, g, report.objective_evals);
    // The forward-backward envelope of the projected-gradient point only
    // descends by gamma*(1 - gamma*L)/2 * |r|^2, so sigma must stay below
    // that for the line search to terminate; both quantities are invariant
    // under the step-3bis update (gamma*L is preserved).
    double gamma = 0.95 / L;
    double sigma = 0.45 * gamma * (1.0 - gamma * L);

    LbfgsBuffer lbfgs(config.lbfgs_memory);
    bool have_prev = false;
    bool u_is_feasible = box.contains(u);
    Eigen::VectorXd u_prev, r_prev;
    double gamma_prev = gamma;

    auto finish = [&](PanocStatus status, const Eigen::VectorXd& point, double residual,
                      double objective_value) {
        report.status = status;
        report.residual = residual;
        report.gamma = gamma;
        report.objective = objective_value;
        report.wall_time_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                      t_start)
                .count();
        return PanocResult{point, report};
    };

    // Progress tracking for the line-search-exhausted exit: only bail out
    // when descent fails beyond rounding noise AND the residual has made no
    // progress for many iterations.
    double best_r_inf = std::numeric_limits<double>::infinity();
    int iterations_since_improvement = 0;

    Eigen::VectorXd u_bar, r;
    for (int iter = 0; iter < config.max_iterations; ++iter) {
        report.iterations = iter + 1;

        // Projected-gradient point and residual; double L until the local
        // quadratic upper bound holds along the step (step 3bis).
        double f_bar = 0.0;
        for (int update = 0; update <= 100; ++update) {
            ResidualEval re = fixed_point_residual(u, g, gamma, box);
            u_bar = std::move(re.projected);
            r = std::move(re.residual);
            if (r.lpNorm<Eigen::Infinity>() == 0.0) {
                f_bar = f;
                break;
            }
            f_bar = objective(u_bar, nullptr);
            ++report.objective_evals;
            double bound = f - gamma * g.dot(r) +
                           0.5 * L * gamma * gamma * r.squaredNorm();
            if (f_bar <= bound + 1e-10 * std::max(1.0, std::abs(f))) break;
            gamma *= 0.5;
            L *= 2.0;
            sigma *= 0.5;
            ++report.lipschitz_updates;
            lbfgs.clear();  // the residual operator changed with gamma
        }

        if (have_prev && gamma == gamma_prev) lbfgs.push(u - u_prev, r - r_prev);

        const double r_inf = r.lpNorm<Eigen::Infinity>();
        const double r_norm2 = r.squaredNorm();
        if (config.observer)
            config.observer({iter, r_inf, gamma, f});
        if (r_inf < best_r_inf * (1.0 - 1e-12)) {
            best_r_inf = r_inf;
            iterations_since_improvement = 0;
        } else {
            ++iterations_since_improvement;
        }

        if (r_inf < config.tolerance) {
            if (u_is_feasible) return finish(PanocStatus::Converged, u, r_inf, f);
            // Move to the projected point and re-certify the residual there
            // so the returned point is feasible and meets the tolerance.
            u_prev = u;
            r_prev = r;
            gamma_prev = gamma;
            have_prev = true;
            u = u_bar;
            f = objective(u, &g);
            ++report.objective_evals;
            u_is_feasible = true;
            continue;
        }

        double phi_u = forward_backward_envelope(f, g, u, gamma, box);
        // With an empty buffer the quasi-Newton model has no scale yet; use
        // H_0 = gamma*I so the full step coincides with the projected
        // gradient step instead of a unit-stepsize gradient step.
        Eigen::VectorXd d =
            lbfgs.size() > 0 ? lbfgs.direction(r) : Eigen::VectorXd(-gamma * r);

        // The envelope is a valid merit only where gamma is compatible with
        // the local curvature; candidates far outside the box reach regions
        // where it is unbounded below, so they are rejected outright.
        const double trust_span =
            10.0 * (1.0 + (box.upper - box.lower).lpNorm<Eigen::Infinity>());

        Eigen::VectorXd u_next;
        double f_next = 0.0, phi_next = 0.0;
        Eigen::VectorXd g_next(u.size());
        bool accepted = false;
        double alpha = 1.0;
        for (int halving = 0; halving <= config.max_linesearch_halvings; ++halving) {
            u_next = u - (1.0 - alpha) * gamma * r + alpha * d;
            if ((u_next - project_box(u_next, box)).lpNorm<Eigen::Infinity>() > trust_span) {
                alpha *= 0.5;
                continue;
            }
            f_next = objective(u_next, &g_next);
            ++report.objective_evals;
            if (!std::isfinite(f_next) || !g_next.allFinite()) {
                alpha *= 0.5;  // overflow region, shrink toward the PG step
                continue;
            }
            phi_next = forward_backward_envelope(f_next, g_next, u_next, gamma, box);
            if (phi_next <= phi_u - sigma * r_norm2) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }

        bool took_fallback = false;
        if (!accepted) {
            // Pure projected-gradient step; also forget the quasi-Newton
            // history that produced the failing direction.
            u_next = u_bar;
            f_next = objective(u_next, &g_next);
            ++report.objective_evals;
            phi_next = forward_backward_envelope(f_next, g_next, u_next, gamma, box);
            ++report.linesearch_fallbacks;
            lbfgs.clear();
            took_fallback = true;
        }

        const double noise_slack = 1e-10 * std::max(1.0, std::abs(phi_u));
        if (config.check_fbe_descent) {
            double excess = phi_next - (phi_u - sigma * r_norm2);
            report.fbe_worst_excess = std::max(report.fbe_worst_excess, excess);
            if (excess > noise_slack) ++report.fbe_descent_violations;
        }

        if (took_fallback && phi_next > phi_u + noise_slack &&
            iterations_since_improvement >= 20) {
            // Descent failed beyond rounding and the residual has been flat
            // for many iterations: numerically stuck, stop at the feasible
            // projected point.
            ResidualEval re = fixed_point_residual(u_next, g_next, gamma, box);
            return finish(PanocStatus::LineSearchExhausted, u_next,
                          re.residual.lpNorm<Eigen::Infinity>(), f_next);
        }

        u_prev = u;
        r_prev = r;
        gamma_prev = gamma;
        have_prev = true;
        u = std::move(u_next);
        f = f_next;
        g = std::move(g_next);
        u_is_feasible = took_fallback;
    }

    // Iteration budget exhausted: report the last projected point, which is
    // always feasible.
    double f_bar_final = objective(u_bar, nullptr);
    ++report.objective_evals;
    return finish(PanocStatus::MaxIterations, u_bar, r.lpNorm<Eigen::Infinity>(),
                  f_bar_final);
}

}  // namespace panocnav
