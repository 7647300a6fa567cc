#include "lowdim/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <variant>

namespace lowdim {

namespace {

enum class Var { X, Y, Z, R, Phi, T };
enum class Func { Sin, Cos, Exp, Abs, Sqrt };
enum class Op { Add, Sub, Mul, Div, Pow };

const char* var_name(Var v) {
    switch (v) {
        case Var::X: return "x";
        case Var::Y: return "y";
        case Var::Z: return "z";
        case Var::R: return "r";
        case Var::Phi: return "phi";
        case Var::T: return "t";
    }
    return "?";
}

const char* func_name(Func f) {
    switch (f) {
        case Func::Sin: return "sin";
        case Func::Cos: return "cos";
        case Func::Exp: return "exp";
        case Func::Abs: return "abs";
        case Func::Sqrt: return "sqrt";
    }
    return "?";
}

int precedence(Op op) {
    switch (op) {
        case Op::Add:
        case Op::Sub: return 1;
        case Op::Mul:
        case Op::Div: return 2;
        case Op::Pow: return 4;
    }
    return 0;
}

constexpr int kUnaryPrecedence = 3;
constexpr int kAtomPrecedence = 5;

}  // namespace

struct Expression::Node {
    struct Number {
        double value;
    };
    struct Variable {
        Var var;
    };
    struct Negate {
        std::shared_ptr<const Node> operand;
    };
    struct Call {
        Func func;
        std::shared_ptr<const Node> arg;
    };
    struct Binary {
        Op op;
        std::shared_ptr<const Node> lhs, rhs;
    };
    std::variant<Number, Variable, Negate, Call, Binary> v;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

NodePtr make(Expression::Node::Number n) { return std::make_shared<const Expression::Node>(Expression::Node{n}); }
NodePtr make(Expression::Node::Variable n) { return std::make_shared<const Expression::Node>(Expression::Node{n}); }
NodePtr make(Expression::Node::Negate n) {
    return std::make_shared<const Expression::Node>(Expression::Node{std::move(n)});
}
NodePtr make(Expression::Node::Call n) { return std::make_shared<const Expression::Node>(Expression::Node{std::move(n)}); }
NodePtr make(Expression::Node::Binary n) {
    return std::make_shared<const Expression::Node>(Expression::Node{std::move(n)});
}

const std::vector<std::string> kOperandStart{"number", "variable", "function", "'('", "'-'"};

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    NodePtr parse() {
        NodePtr e = expr();
        skip();
        if (pos_ < src_.size()) error({"operator", "end of input"});
        return e;
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;

    [[noreturn]] void error(std::vector<std::string> expected) const {
        std::string msg = "at offset " + std::to_string(pos_) + ": expected ";
        for (std::size_t i = 0; i < expected.size(); ++i) {
            if (i) msg += i + 1 == expected.size() ? " or " : ", ";
            msg += expected[i];
        }
        msg += pos_ < src_.size() ? ", found '" + std::string(1, src_[pos_]) + "'" : ", found end of input";
        throw ParseError(pos_, std::move(expected), msg);
    }

    void skip() {
        while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r')) {
            ++pos_;
        }
    }

    bool accept(char c) {
        skip();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expr() {
        NodePtr lhs = term();
        for (;;) {
            if (accept('+')) {
                lhs = make(Expression::Node::Binary{Op::Add, lhs, term()});
            } else if (accept('-')) {
                lhs = make(Expression::Node::Binary{Op::Sub, lhs, term()});
            } else {
                return lhs;
            }
        }
    }

    NodePtr term() {
        NodePtr lhs = unary();
        for (;;) {
            if (accept('*')) {
                lhs = make(Expression::Node::Binary{Op::Mul, lhs, unary()});
            } else if (accept('/')) {
                lhs = make(Expression::Node::Binary{Op::Div, lhs, unary()});
            } else {
                return lhs;
            }
        }
    }

    NodePtr unary() {
        if (accept('-')) return make(Expression::Node::Negate{unary()});
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        if (accept('^')) return make(Expression::Node::Binary{Op::Pow, base, unary()});
        return base;
    }

    NodePtr primary() {
        skip();
        if (pos_ >= src_.size()) error(kOperandStart);
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = expr();
            if (!accept(')')) error({"')'"});
            return e;
        }
        if ((c >= '0' && c <= '9') || c == '.') return number();
        if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_') return identifier();
        error(kOperandStart);
    }

    NodePtr number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            const std::size_t s = pos_;
            while (pos_ < src_.size() && src_[pos_] >= '0' && src_[pos_] <= '9') ++pos_;
            return pos_ - s;
        };
        std::size_t count = digits();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            count += digits();
        }
        if (count == 0) {
            pos_ = start;
            error({"digit"});
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (digits() == 0) error({"exponent digit"});
        }
        double value = 0.0;
        const auto res = std::from_chars(src_.data() + start, src_.data() + pos_, value);
        if (res.ec != std::errc() || !std::isfinite(value)) {
            pos_ = start;
            error({"finite number"});
        }
        return make(Expression::Node::Number{value});
    }

    NodePtr identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
        const std::string_view name = src_.substr(start, pos_ - start);
        static constexpr std::pair<std::string_view, Var> vars[] = {
            {"x", Var::X}, {"y", Var::Y}, {"z", Var::Z}, {"r", Var::R}, {"phi", Var::Phi}, {"t", Var::T}};
        for (const auto& [n, v] : vars) {
            if (name == n) return make(Expression::Node::Variable{v});
        }
        static constexpr std::pair<std::string_view, Func> funcs[] = {
            {"sin", Func::Sin}, {"cos", Func::Cos}, {"exp", Func::Exp}, {"abs", Func::Abs}, {"sqrt", Func::Sqrt}};
        for (const auto& [n, f] : funcs) {
            if (name == n) {
                if (!accept('(')) error({"'('"});
                NodePtr arg = expr();
                if (!accept(')')) error({"')'"});
                return make(Expression::Node::Call{f, arg});
            }
        }
        pos_ = start;
        error({"variable (x, y, z, r, phi, t)", "function (sin, cos, exp, abs, sqrt)"});
    }
};

double eval(const Expression::Node& n, const Variables& vars) {
    using N = Expression::Node;
    if (const auto* num = std::get_if<N::Number>(&n.v)) return num->value;
    if (const auto* var = std::get_if<N::Variable>(&n.v)) {
        switch (var->var) {
            case Var::X: return vars.x;
            case Var::Y: return vars.y;
            case Var::Z: return vars.z;
            case Var::R: return vars.r;
            case Var::Phi: return vars.phi;
            case Var::T: return vars.t;
        }
    }
    if (const auto* neg = std::get_if<N::Negate>(&n.v)) return -eval(*neg->operand, vars);
    if (const auto* call = std::get_if<N::Call>(&n.v)) {
        const double a = eval(*call->arg, vars);
        switch (call->func) {
            case Func::Sin: return std::sin(a);
            case Func::Cos: return std::cos(a);
            case Func::Exp: return std::exp(a);
            case Func::Abs: return std::abs(a);
            case Func::Sqrt: return std::sqrt(a);
        }
    }
    const auto& bin = std::get<N::Binary>(n.v);
    const double a = eval(*bin.lhs, vars);
    const double b = eval(*bin.rhs, vars);
    switch (bin.op) {
        case Op::Add: return a + b;
        case Op::Sub: return a - b;
        case Op::Mul: return a * b;
        case Op::Div: return a / b;
        case Op::Pow: return std::pow(a, b);
    }
    return 0.0;
}

int node_precedence(const Expression::Node& n) {
    using N = Expression::Node;
    if (const auto* bin = std::get_if<N::Binary>(&n.v)) return precedence(bin->op);
    if (std::holds_alternative<N::Negate>(n.v)) return kUnaryPrecedence;
    return kAtomPrecedence;
}

void print(const Expression::Node& n, std::string& out) {
    using N = Expression::Node;
    auto wrapped = [&](const Expression::Node& child, bool parens) {
        if (parens) out += '(';
        print(child, out);
        if (parens) out += ')';
    };
    if (const auto* num = std::get_if<N::Number>(&n.v)) {
        char buf[32];
        const auto res = std::to_chars(buf, buf + sizeof buf, num->value);
        out.append(buf, res.ptr);
        return;
    }
    if (const auto* var = std::get_if<N::Variable>(&n.v)) {
        out += var_name(var->var);
        return;
    }
    if (const auto* neg = std::get_if<N::Negate>(&n.v)) {
        out += '-';
        wrapped(*neg->operand, node_precedence(*neg->operand) < kUnaryPrecedence);
        return;
    }
    if (const auto* call = std::get_if<N::Call>(&n.v)) {
        out += func_name(call->func);
        wrapped(*call->arg, true);
        return;
    }
    const auto& bin = std::get<N::Binary>(n.v);
    const int p = precedence(bin.op);
    if (bin.op == Op::Pow) {
        // Base binds tighter than unary minus; the exponent is a unary operand.
        wrapped(*bin.lhs, node_precedence(*bin.lhs) <= p);
        out += '^';
        wrapped(*bin.rhs, node_precedence(*bin.rhs) < kUnaryPrecedence);
        return;
    }
    wrapped(*bin.lhs, node_precedence(*bin.lhs) < p);
    switch (bin.op) {
        case Op::Add: out += " + "; break;
        case Op::Sub: out += " - "; break;
        case Op::Mul: out += '*'; break;
        case Op::Div: out += '/'; break;
        case Op::Pow: break;
    }
    // Left association: an equal-precedence right operand needs parentheses.
    wrapped(*bin.rhs, node_precedence(*bin.rhs) <= p);
}

}  // namespace

ParseError::ParseError(std::size_t offset, std::vector<std::string> expected, const std::string& message)
    : Error(ErrorKind::ParseError, "cli", message), offset_(offset), expected_(std::move(expected)) {}

Variables local_variables(const PointContext& at, double t) {
    Variables v;
    v.t = t;
    v.x = at.local[0];
    if (at.dim == 1) {
        v.r = std::abs(v.x);
        v.phi = v.x < 0.0 ? std::numbers::pi : 0.0;
        return v;
    }
    v.y = at.local[1];
    v.r = std::hypot(v.x, v.y);
    v.phi = std::atan2(v.y, v.x);
    return v;
}

Variables ambient_variables(const Vec3& p, double t) {
    Variables v;
    v.x = p.x;
    v.y = p.y;
    v.z = p.z;
    v.r = std::hypot(p.x, p.y);
    v.phi = std::atan2(p.y, p.x);
    v.t = t;
    return v;
}

Expression::Expression() : Expression(make(Node::Number{0.0})) {}

Expression::Expression(std::shared_ptr<const Node> root) : root_(std::move(root)) {}

Expression Expression::parse(std::string_view source) { return Expression(Parser(source).parse()); }

Expression Expression::constant(double value) { return Expression(make(Node::Number{value})); }

double Expression::evaluate(const Variables& v) const { return eval(*root_, v); }

std::string Expression::to_string() const {
    std::string out;
    print(*root_, out);
    return out;
}

namespace {

bool mentions(const Expression::Node* root, bool time_only) {
    using N = Expression::Node;
    std::vector<const N*> stack{root};
    while (!stack.empty()) {
        const N* n = stack.back();
        stack.pop_back();
        if (const auto* var = std::get_if<N::Variable>(&n->v)) {
            if (!time_only || var->var == Var::T) return true;
        } else if (const auto* neg = std::get_if<N::Negate>(&n->v)) {
            stack.push_back(neg->operand.get());
        } else if (const auto* call = std::get_if<N::Call>(&n->v)) {
            stack.push_back(call->arg.get());
        } else if (const auto* bin = std::get_if<N::Binary>(&n->v)) {
            stack.push_back(bin->lhs.get());
            stack.push_back(bin->rhs.get());
        }
    }
    return false;
}

}  // namespace

bool Expression::depends_on_time() const { return mentions(root_.get(), true); }

bool Expression::is_constant() const { return !mentions(root_.get(), false); }

}  // namespace lowdim
