#include "panocnav/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace panocnav {

double ExprNode::eval(double x, double y) const {
    switch (kind) {
        case ExprKind::Constant: return value;
        case ExprKind::VarX: return x;
        case ExprKind::VarY: return y;
        case ExprKind::Add: return lhs->eval(x, y) + rhs->eval(x, y);
        case ExprKind::Sub: return lhs->eval(x, y) - rhs->eval(x, y);
        case ExprKind::Mul: return lhs->eval(x, y) * rhs->eval(x, y);
        case ExprKind::Div: return lhs->eval(x, y) / rhs->eval(x, y);
        case ExprKind::Pow: {
            double base = lhs->eval(x, y);
            double acc = 1.0;
            for (int i = 0; i < exponent; ++i) acc *= base;
            return acc;
        }
        case ExprKind::Sin: return std::sin(lhs->eval(x, y));
        case ExprKind::Cos: return std::cos(lhs->eval(x, y));
        case ExprKind::Neg: return -lhs->eval(x, y);
    }
    return 0.0;  // unreachable
}

bool ExprNode::is_constant() const {
    switch (kind) {
        case ExprKind::Constant: return true;
        case ExprKind::VarX:
        case ExprKind::VarY: return false;
        default:
            if (lhs && !lhs->is_constant()) return false;
            if (rhs && !rhs->is_constant()) return false;
            return true;
    }
}

namespace {

ExprPtr make_node(ExprKind kind, ExprPtr lhs = nullptr, ExprPtr rhs = nullptr) {
    auto node = std::make_shared<ExprNode>();
    node->kind = kind;
    node->lhs = std::move(lhs);
    node->rhs = std::move(rhs);
    return node;
}

bool is_const_value(const ExprPtr& e, double v) {
    return e->kind == ExprKind::Constant && e->value == v;
}

}  // namespace

ExprPtr ExprNode::constant(double v) {
    auto node = std::make_shared<ExprNode>();
    node->kind = ExprKind::Constant;
    node->value = v;
    return node;
}

ExprPtr ExprNode::var_x() { return make_node(ExprKind::VarX); }
ExprPtr ExprNode::var_y() { return make_node(ExprKind::VarY); }

ExprPtr ExprNode::add(ExprPtr a, ExprPtr b) {
    if (a->kind == ExprKind::Constant && b->kind == ExprKind::Constant)
        return constant(a->value + b->value);
    if (is_const_value(a, 0.0)) return b;
    if (is_const_value(b, 0.0)) return a;
    return make_node(ExprKind::Add, std::move(a), std::move(b));
}

ExprPtr ExprNode::sub(ExprPtr a, ExprPtr b) {
    if (a->kind == ExprKind::Constant && b->kind == ExprKind::Constant)
        return constant(a->value - b->value);
    if (is_const_value(b, 0.0)) return a;
    if (is_const_value(a, 0.0)) return neg(std::move(b));
    return make_node(ExprKind::Sub, std::move(a), std::move(b));
}

ExprPtr ExprNode::mul(ExprPtr a, ExprPtr b) {
    if (a->kind == ExprKind::Constant && b->kind == ExprKind::Constant)
        return constant(a->value * b->value);
    if (is_const_value(a, 0.0) || is_const_value(b, 0.0)) return constant(0.0);
    if (is_const_value(a, 1.0)) return b;
    if (is_const_value(b, 1.0)) return a;
    return make_node(ExprKind::Mul, std::move(a), std::move(b));
}

ExprPtr ExprNode::div(ExprPtr a, ExprPtr b) {
    if (!b->is_constant())
        throw std::invalid_argument("division requires a constant-valued divisor");
    if (a->kind == ExprKind::Constant && b->kind == ExprKind::Constant)
        return constant(a->value / b->value);
    if (is_const_value(b, 1.0)) return a;
    if (is_const_value(a, 0.0)) return constant(0.0);
    return make_node(ExprKind::Div, std::move(a), std::move(b));
}

ExprPtr ExprNode::pow(ExprPtr a, int n) {
    if (n < 0) throw std::invalid_argument("negative exponent");
    if (n == 0) return constant(1.0);
    if (n == 1) return a;
    if (a->kind == ExprKind::Constant) {
        double acc = 1.0;
        for (int i = 0; i < n; ++i) acc *= a->value;
        return constant(acc);
    }
    auto node = make_node(ExprKind::Pow, std::move(a));
    auto mutable_node = std::const_pointer_cast<ExprNode>(node);
    mutable_node->exponent = n;
    return node;
}

ExprPtr ExprNode::sin(ExprPtr a) {
    if (a->kind == ExprKind::Constant) return constant(std::sin(a->value));
    return make_node(ExprKind::Sin, std::move(a));
}

ExprPtr ExprNode::cos(ExprPtr a) {
    if (a->kind == ExprKind::Constant) return constant(std::cos(a->value));
    return make_node(ExprKind::Cos, std::move(a));
}

ExprPtr ExprNode::neg(ExprPtr a) {
    if (a->kind == ExprKind::Constant) return constant(-a->value);
    if (a->kind == ExprKind::Neg) return a->lhs;
    return make_node(ExprKind::Neg, std::move(a));
}

ExprPtr ExprNode::differentiate(bool wrt_x) const {
    switch (kind) {
        case ExprKind::Constant: return constant(0.0);
        case ExprKind::VarX: return constant(wrt_x ? 1.0 : 0.0);
        case ExprKind::VarY: return constant(wrt_x ? 0.0 : 1.0);
        case ExprKind::Add: return add(lhs->differentiate(wrt_x), rhs->differentiate(wrt_x));
        case ExprKind::Sub: return sub(lhs->differentiate(wrt_x), rhs->differentiate(wrt_x));
        case ExprKind::Mul:
            return add(mul(lhs->differentiate(wrt_x), rhs),
                       mul(lhs, rhs->differentiate(wrt_x)));
        case ExprKind::Div:
            // divisor is constant-valued
            return div(lhs->differentiate(wrt_x), rhs);
        case ExprKind::Pow:
            return mul(mul(constant(static_cast<double>(exponent)), pow(lhs, exponent - 1)),
                       lhs->differentiate(wrt_x));
        case ExprKind::Sin: return mul(cos(lhs), lhs->differentiate(wrt_x));
        case ExprKind::Cos: return mul(neg(sin(lhs)), lhs->differentiate(wrt_x));
        case ExprKind::Neg: return neg(lhs->differentiate(wrt_x));
    }
    return constant(0.0);  // unreachable
}

namespace {
// precedence levels used by the printer: additive 1, multiplicative 2,
// unary minus 3, power 4
constexpr int kPrecAdd = 1;
constexpr int kPrecMul = 2;
constexpr int kPrecNeg = 3;
constexpr int kPrecPow = 4;

std::string format_number(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}
}  // namespace

std::string ExprNode::to_string() const { return to_string(0); }

std::string ExprNode::to_string(int parent_precedence) const {
    std::string body;
    int prec = 0;
    switch (kind) {
        case ExprKind::Constant:
            if (value < 0) return "(" + format_number(value) + ")";
            return format_number(value);
        case ExprKind::VarX: return "x";
        case ExprKind::VarY: return "y";
        case ExprKind::Add:
            prec = kPrecAdd;
            body = lhs->to_string(prec) + " + " + rhs->to_string(prec);
            break;
        case ExprKind::Sub:
            prec = kPrecAdd;
            body = lhs->to_string(prec) + " - " + rhs->to_string(prec + 1);
            break;
        case ExprKind::Mul:
            prec = kPrecMul;
            body = lhs->to_string(prec) + "*" + rhs->to_string(prec);
            break;
        case ExprKind::Div:
            prec = kPrecMul;
            body = lhs->to_string(prec) + "/" + rhs->to_string(prec + 1);
            break;
        case ExprKind::Pow:
            prec = kPrecPow;
            body = lhs->to_string(prec + 1) + "^" + std::to_string(exponent);
            break;
        case ExprKind::Sin: return "sin(" + lhs->to_string(0) + ")";
        case ExprKind::Cos: return "cos(" + lhs->to_string(0) + ")";
        case ExprKind::Neg:
            prec = kPrecNeg;
            body = "-" + lhs->to_string(prec + 1);
            break;
    }
    if (prec < parent_precedence) return "(" + body + ")";
    return body;
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

class Lexer {
public:
    enum class Tok { End, Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen };

    explicit Lexer(const std::string& text) : text_(text) { advance(); }

    Tok token() const { return tok_; }
    double number() const { return number_; }
    const std::string& ident() const { return ident_; }
    std::size_t token_pos() const { return token_pos_; }
    bool number_is_integer() const { return number_is_integer_; }

    void advance() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
        token_pos_ = pos_;
        if (pos_ >= text_.size()) {
            tok_ = Tok::End;
            return;
        }
        char c = text_[pos_];
        switch (c) {
            case '+': tok_ = Tok::Plus; ++pos_; return;
            case '-': tok_ = Tok::Minus; ++pos_; return;
            case '*': tok_ = Tok::Star; ++pos_; return;
            case '/': tok_ = Tok::Slash; ++pos_; return;
            case '^': tok_ = Tok::Caret; ++pos_; return;
            case '(': tok_ = Tok::LParen; ++pos_; return;
            case ')': tok_ = Tok::RParen; ++pos_; return;
            default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* start = text_.c_str() + pos_;
            char* end = nullptr;
            number_ = std::strtod(start, &end);
            if (end == start) throw ParseError("malformed number", pos_);
            std::string digits(start, static_cast<std::size_t>(end - start));
            number_is_integer_ =
                digits.find('.') == std::string::npos &&
                digits.find('e') == std::string::npos &&
                digits.find('E') == std::string::npos;
            pos_ += static_cast<std::size_t>(end - start);
            tok_ = Tok::Number;
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   std::isalnum(static_cast<unsigned char>(text_[pos_])))
                ++pos_;
            ident_ = text_.substr(start, pos_ - start);
            tok_ = Tok::Ident;
            return;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

private:
    const std::string& text_;
    std::size_t pos_ = 0;
    std::size_t token_pos_ = 0;
    Tok tok_ = Tok::End;
    double number_ = 0.0;
    bool number_is_integer_ = false;
    std::string ident_;
};

class Parser {
public:
    explicit Parser(const std::string& text) : lex_(text) {}

    ExprPtr parse() {
        ExprPtr e = parse_expr();
        if (lex_.token() != Lexer::Tok::End)
            throw ParseError("trailing input after expression", lex_.token_pos());
        return e;
    }

private:
    ExprPtr parse_expr() {
        ExprPtr e = parse_term();
        while (lex_.token() == Lexer::Tok::Plus || lex_.token() == Lexer::Tok::Minus) {
            bool plus = lex_.token() == Lexer::Tok::Plus;
            lex_.advance();
            ExprPtr rhs = parse_term();
            e = plus ? ExprNode::add(e, rhs) : ExprNode::sub(e, rhs);
        }
        return e;
    }

    ExprPtr parse_term() {
        ExprPtr e = parse_factor();
        while (lex_.token() == Lexer::Tok::Star || lex_.token() == Lexer::Tok::Slash) {
            bool star = lex_.token() == Lexer::Tok::Star;
            std::size_t op_pos = lex_.token_pos();
            lex_.advance();
            ExprPtr rhs = parse_factor();
            if (star) {
                e = ExprNode::mul(e, rhs);
            } else {
                if (!rhs->is_constant())
                    throw ParseError("division only by constant-valued subexpressions", op_pos);
                if (rhs->eval(0.0, 0.0) == 0.0)
                    throw ParseError("division by zero constant", op_pos);
                e = ExprNode::div(e, rhs);
            }
        }
        return e;
    }

    ExprPtr parse_factor() {
        ExprPtr base = parse_atom();
        if (lex_.token() == Lexer::Tok::Caret) {
            lex_.advance();
            if (lex_.token() != Lexer::Tok::Number)
                throw ParseError("expected integer exponent after '^'", lex_.token_pos());
            if (!lex_.number_is_integer())
                throw ParseError("exponent must be a nonnegative integer", lex_.token_pos());
            double v = lex_.number();
            int n = static_cast<int>(v);
            if (static_cast<double>(n) != v || n < 0)
                throw ParseError("exponent must be a nonnegative integer", lex_.token_pos());
            lex_.advance();
            return ExprNode::pow(base, n);
        }
        return base;
    }

    ExprPtr parse_atom() {
        switch (lex_.token()) {
            case Lexer::Tok::Number: {
                double v = lex_.number();
                lex_.advance();
                return ExprNode::constant(v);
            }
            case Lexer::Tok::Ident: {
                std::string name = lex_.ident();
                std::size_t pos = lex_.token_pos();
                lex_.advance();
                if (name == "x") return ExprNode::var_x();
                if (name == "y") return ExprNode::var_y();
                if (name == "sin" || name == "cos") {
                    if (lex_.token() != Lexer::Tok::LParen)
                        throw ParseError("expected '(' after " + name, lex_.token_pos());
                    lex_.advance();
                    ExprPtr arg = parse_expr();
                    expect_rparen();
                    return name == "sin" ? ExprNode::sin(arg) : ExprNode::cos(arg);
                }
                throw ParseError("unknown identifier '" + name + "'", pos);
            }
            case Lexer::Tok::LParen: {
                lex_.advance();
                ExprPtr e = parse_expr();
                expect_rparen();
                return e;
            }
            case Lexer::Tok::Minus: {
                lex_.advance();
                return ExprNode::neg(parse_atom_or_factor());
            }
            default:
                throw ParseError("expected number, variable, function or '('",
                                 lex_.token_pos());
        }
    }

    // unary minus binds a full factor so "-x^2" reads as -(x^2)
    ExprPtr parse_atom_or_factor() { return parse_factor(); }

    void expect_rparen() {
        if (lex_.token() != Lexer::Tok::RParen)
            throw ParseError("expected ')'", lex_.token_pos());
        lex_.advance();
    }

    Lexer lex_;
};

}  // namespace

ConstraintExpr::ConstraintExpr(ExprPtr root)
    : root_(std::move(root)),
      dx_(root_->differentiate(true)),
      dy_(root_->differentiate(false)) {}

ConstraintExpr ConstraintExpr::parse(const std::string& text) {
    Parser parser(text);
    return ConstraintExpr(parser.parse());
}

double ConstraintExpr::eval(double x, double y) const {
    double v = root_->eval(x, y);
    if (!std::isfinite(v))
        throw EvaluationError("constraint evaluated to a non-finite value at (" +
                              std::to_string(x) + ", " + std::to_string(y) + ")");
    return v;
}

void ConstraintExpr::gradient(double x, double y, double& dx, double& dy) const {
    dx = dx_->eval(x, y);
    dy = dy_->eval(x, y);
    if (!std::isfinite(dx) || !std::isfinite(dy))
        throw EvaluationError("constraint gradient evaluated to a non-finite value");
}

}  // namespace panocnav
