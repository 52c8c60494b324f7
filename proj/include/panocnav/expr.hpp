#pragma once

#include <memory>
#include <stdexcept>
#include <string>

namespace panocnav {

/// Thrown when an expression text does not conform to the constraint grammar.
/// `position` is the zero-based character offset of the offending token.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, std::size_t position)
        : std::runtime_error(message + " (at position " + std::to_string(position) + ")"),
          position_(position) {}

    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

/// Thrown when an expression produces a non-finite value (overflow in a
/// polynomial term, typically).
class EvaluationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ExprKind {
    Constant,
    VarX,
    VarY,
    Add,
    Sub,
    Mul,
    Div,  // divisor restricted to constant-valued subexpressions
    Pow,  // nonnegative integer exponent
    Sin,
    Cos,
    Neg,
};

class ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

/// Immutable expression-tree node over the variables x and y.
class ExprNode {
public:
    ExprKind kind;
    double value = 0.0;  // Constant payload
    int exponent = 0;    // Pow payload
    ExprPtr lhs, rhs;

    double eval(double x, double y) const;

    /// True when no variable occurs in the subtree.
    bool is_constant() const;

    ExprPtr differentiate(bool wrt_x) const;

    std::string to_string() const;

    // Smart constructors. They fold constants and drop algebraic no-ops so
    // derivative trees stay small.
    static ExprPtr constant(double v);
    static ExprPtr var_x();
    static ExprPtr var_y();
    static ExprPtr add(ExprPtr a, ExprPtr b);
    static ExprPtr sub(ExprPtr a, ExprPtr b);
    static ExprPtr mul(ExprPtr a, ExprPtr b);
    static ExprPtr div(ExprPtr a, ExprPtr b);
    static ExprPtr pow(ExprPtr a, int n);
    static ExprPtr sin(ExprPtr a);
    static ExprPtr cos(ExprPtr a);
    static ExprPtr neg(ExprPtr a);

private:
    std::string to_string(int parent_precedence) const;
};

/// A smooth scalar constraint h(x, y) together with its symbolic partial
/// derivatives, built once at construction. The obstacle semantics are
/// h > 0 inside the constrained region.
class ConstraintExpr {
public:
    ConstraintExpr() = default;
    explicit ConstraintExpr(ExprPtr root);

    /// Parses `text` against the grammar
    ///   expr   := term (("+"|"-") term)*
    ///   term   := factor (("*"|"/") factor)*
    ///   factor := atom ("^" INT)?
    ///   atom   := NUMBER | "x" | "y" | "(" expr ")"
    ///           | ("sin"|"cos") "(" expr ")" | "-" atom
    /// Division is accepted only when the divisor is constant-valued.
    static ConstraintExpr parse(const std::string& text);

    /// Value of h at (x, y). Throws EvaluationError on non-finite results.
    double eval(double x, double y) const;

    /// (dh/dx, dh/dy) at (x, y) from the cached symbolic partials.
    void gradient(double x, double y, double& dx, double& dy) const;

    const ExprPtr& root() const { return root_; }
    const ExprPtr& partial_x() const { return dx_; }
    const ExprPtr& partial_y() const { return dy_; }

    std::string to_string() const { return root_->to_string(); }

    bool valid() const { return root_ != nullptr; }

private:
    ExprPtr root_, dx_, dy_;
};

}  // namespace panocnav
