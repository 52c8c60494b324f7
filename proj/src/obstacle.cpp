#include "panocnav/obstacle.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <utility>

namespace panocnav {

ObstacleSpec ObstacleSpec::from_true(std::vector<ConstraintExpr> true_constraints,
                                     double margin, std::string label) {
    if (true_constraints.empty())
        throw std::invalid_argument("obstacle needs at least one constraint");
    if (margin < 0.0) throw std::invalid_argument("enlargement must be nonnegative");
    ObstacleSpec spec;
    spec.true_constraints = std::move(true_constraints);
    spec.enlargement = margin;
    spec.label = std::move(label);
    return apply_enlargement(spec);
}

ObstacleSpec ObstacleSpec::from_pair(std::vector<ConstraintExpr> enlarged,
                                     std::vector<ConstraintExpr> true_constraints,
                                     std::string label) {
    if (enlarged.empty() || true_constraints.empty())
        throw std::invalid_argument("obstacle needs at least one constraint");
    ObstacleSpec spec;
    spec.constraints = std::move(enlarged);
    spec.true_constraints = std::move(true_constraints);
    spec.label = std::move(label);
    return spec;
}

double eval_psi(const std::vector<ConstraintExpr>& constraints, const Position& z) {
    double product = 1.0;
    for (const ConstraintExpr& h : constraints) {
        double v = h.eval(z.x, z.y);
        if (v <= 0.0) return 0.0;
        product *= v;
    }
    if (!std::isfinite(product))
        throw EvaluationError("psi evaluated to a non-finite value");
    return product;
}

double eval_psi(const ObstacleSpec& obstacle, const Position& z) {
    return eval_psi(obstacle.constraints, z);
}

double eval_psi_true(const ObstacleSpec& obstacle, const Position& z) {
    return eval_psi(obstacle.true_constraints, z);
}

PenaltyEval eval_penalty_gradient(const ObstacleSpec& obstacle, const Position& z,
                                  double mu) {
    if (mu < 0.0) throw std::invalid_argument("penalty factor must be nonnegative");
    PenaltyEval out;
    const auto& hs = obstacle.constraints;
    const std::size_t m = hs.size();

    // hinge values; any nonpositive h zeroes both psi and the gradient
    double psi = 1.0;
    std::vector<double> values(m);
    for (std::size_t i = 0; i < m; ++i) {
        values[i] = hs[i].eval(z.x, z.y);
        if (values[i] <= 0.0) return out;
        psi *= values[i];
    }
    if (!std::isfinite(psi))
        throw EvaluationError("psi evaluated to a non-finite value");

    out.value = 0.5 * mu * psi * psi;
    for (std::size_t i = 0; i < m; ++i) {
        // [h_i]_+ * prod_{j != i} [h_j]_+^2  ==  psi^2 / h_i
        double factor = mu * psi * psi / values[i];
        double gx, gy;
        hs[i].gradient(z.x, z.y, gx, gy);
        out.grad_x += factor * gx;
        out.grad_y += factor * gy;
    }
    if (!std::isfinite(out.value) || !std::isfinite(out.grad_x) || !std::isfinite(out.grad_y))
        throw EvaluationError("penalty gradient evaluated to a non-finite value");
    return out;
}

// ---------------------------------------------------------------------------
// Enlargement: expand a constraint into a bivariate polynomial, classify the
// family, rebuild the offset expression.
// ---------------------------------------------------------------------------

namespace {

using Monomials = std::map<std::pair<int, int>, double>;

constexpr int kMaxDegree = 6;

bool expand_polynomial(const ExprPtr& e, Monomials& out);

bool multiply(const Monomials& a, const Monomials& b, Monomials& out) {
    for (const auto& [ea, ca] : a)
        for (const auto& [eb, cb] : b) {
            int dx = ea.first + eb.first;
            int dy = ea.second + eb.second;
            if (dx + dy > kMaxDegree) return false;
            out[{dx, dy}] += ca * cb;
        }
    return true;
}

bool expand_polynomial(const ExprPtr& e, Monomials& out) {
    switch (e->kind) {
        case ExprKind::Constant: out[{0, 0}] += e->value; return true;
        case ExprKind::VarX: out[{1, 0}] += 1.0; return true;
        case ExprKind::VarY: out[{0, 1}] += 1.0; return true;
        case ExprKind::Add: {
            return expand_polynomial(e->lhs, out) && expand_polynomial(e->rhs, out);
        }
        case ExprKind::Sub: {
            Monomials rhs;
            if (!expand_polynomial(e->lhs, out) || !expand_polynomial(e->rhs, rhs)) return false;
            for (const auto& [k, v] : rhs) out[k] -= v;
            return true;
        }
        case ExprKind::Neg: {
            Monomials inner;
            if (!expand_polynomial(e->lhs, inner)) return false;
            for (const auto& [k, v] : inner) out[k] -= v;
            return true;
        }
        case ExprKind::Mul: {
            Monomials a, b, prod;
            if (!expand_polynomial(e->lhs, a) || !expand_polynomial(e->rhs, b)) return false;
            if (!multiply(a, b, prod)) return false;
            for (const auto& [k, v] : prod) out[k] += v;
            return true;
        }
        case ExprKind::Div: {
            Monomials a;
            if (!expand_polynomial(e->lhs, a)) return false;
            double c = e->rhs->eval(0.0, 0.0);
            for (const auto& [k, v] : a) out[k] += v / c;
            return true;
        }
        case ExprKind::Pow: {
            Monomials base, acc;
            if (!expand_polynomial(e->lhs, base)) return false;
            acc[{0, 0}] = 1.0;
            for (int i = 0; i < e->exponent; ++i) {
                Monomials next;
                if (!multiply(acc, base, next)) return false;
                acc = std::move(next);
            }
            for (const auto& [k, v] : acc) out[k] += v;
            return true;
        }
        case ExprKind::Sin:
        case ExprKind::Cos:
            return false;
    }
    return false;
}

int total_degree(const Monomials& m) {
    int deg = 0;
    for (const auto& [k, v] : m)
        if (v != 0.0) deg = std::max(deg, k.first + k.second);
    return deg;
}

double coeff(const Monomials& m, int dx, int dy) {
    auto it = m.find({dx, dy});
    return it == m.end() ? 0.0 : it->second;
}

ConstraintExpr enlarge_affine(const Monomials& m, double margin) {
    double b = coeff(m, 0, 0);
    double cx = coeff(m, 1, 0);
    double cy = coeff(m, 0, 1);
    double norm = std::hypot(cx, cy);
    if (norm == 0.0)
        throw UnsupportedEnlargement("constant constraint cannot be enlarged");
    using E = ExprNode;
    ExprPtr expr = E::add(E::constant(b + margin * norm),
                          E::add(E::mul(E::constant(cx), E::var_x()),
                                 E::mul(E::constant(cy), E::var_y())));
    return ConstraintExpr(expr);
}

ConstraintExpr enlarge_quadratic(const Monomials& m, double margin) {
    // h(z) = h(c) - (z - c)' E (z - c) with E = -[quadratic part]; grow each
    // semi-axis sqrt(h(c)/lambda_j) by the margin.
    Eigen::Matrix2d quad;
    quad << coeff(m, 2, 0), 0.5 * coeff(m, 1, 1), 0.5 * coeff(m, 1, 1), coeff(m, 0, 2);
    Eigen::Matrix2d E_mat = -quad;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(E_mat);
    if (eig.eigenvalues().minCoeff() <= 0.0)
        throw UnsupportedEnlargement(
            "quadratic constraint is not an ellipsoid (indefinite quadratic part)");

    Eigen::Vector2d linear(coeff(m, 1, 0), coeff(m, 0, 1));
    Eigen::Vector2d center = 0.5 * E_mat.ldlt().solve(linear);
    double h_center = coeff(m, 0, 0) + linear.dot(center) -
                      center.dot(E_mat * center);
    if (h_center <= 0.0)
        throw UnsupportedEnlargement("ellipsoid constraint has empty interior");

    Eigen::Vector2d grown;
    for (int j = 0; j < 2; ++j) {
        double axis = std::sqrt(h_center / eig.eigenvalues()[j]) + margin;
        grown[j] = h_center / (axis * axis);
    }
    Eigen::Matrix2d E_new = eig.eigenvectors() * grown.asDiagonal() *
                            eig.eigenvectors().transpose();

    using E = ExprNode;
    ExprPtr dx = E::sub(E::var_x(), E::constant(center.x()));
    ExprPtr dy = E::sub(E::var_y(), E::constant(center.y()));
    ExprPtr form = E::add(
        E::add(E::mul(E::constant(E_new(0, 0)), E::pow(dx, 2)),
               E::mul(E::constant(2.0 * E_new(0, 1)), E::mul(dx, dy))),
        E::mul(E::constant(E_new(1, 1)), E::pow(dy, 2)));
    return ConstraintExpr(E::sub(E::constant(h_center), form));
}

ConstraintExpr enlarge_constraint(const ConstraintExpr& h, double margin) {
    Monomials m;
    if (!expand_polynomial(h.root(), m))
        throw UnsupportedEnlargement(
            "no automatic enlargement rule for '" + h.to_string() +
            "'; supply the enlarged expression explicitly");
    int deg = total_degree(m);
    if (deg <= 1) return enlarge_affine(m, margin);
    if (deg == 2) return enlarge_quadratic(m, margin);
    throw UnsupportedEnlargement(
        "no automatic enlargement rule for degree-" + std::to_string(deg) +
        " constraint '" + h.to_string() + "'; supply the enlarged expression explicitly");
}

}  // namespace

ObstacleSpec apply_enlargement(const ObstacleSpec& obstacle) {
    if (obstacle.true_constraints.empty())
        throw std::invalid_argument("obstacle needs at least one constraint");
    if (obstacle.enlargement < 0.0)
        throw std::invalid_argument("enlargement must be nonnegative");

    ObstacleSpec out = obstacle;
    if (obstacle.enlargement == 0.0) {
        out.constraints = obstacle.true_constraints;
        return out;
    }
    out.constraints.clear();
    out.constraints.reserve(obstacle.true_constraints.size());
    for (const ConstraintExpr& h : obstacle.true_constraints)
        out.constraints.push_back(enlarge_constraint(h, obstacle.enlargement));
    return out;
}

}  // namespace panocnav
