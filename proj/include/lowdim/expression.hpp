#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "lowdim/error.hpp"
#include "lowdim/meshing.hpp"

namespace lowdim {

struct Variables {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double r = 0.0;
    double phi = 0.0;
    double t = 0.0;
};

/// Component-local variables. Segment: x is the arclength parameter from the
/// midpoint, y = z = 0, r = |x|, phi = 0 or pi. Disc: (x, y) in the frame,
/// z = 0, (r, phi) polar.
Variables local_variables(const PointContext& at, double t);

/// Ambient variables: (x, y, z) in R^3, r and phi cylindrical about the z axis.
Variables ambient_variables(const Vec3& p, double t);

class ParseError : public Error {
public:
    ParseError(std::size_t offset, std::vector<std::string> expected, const std::string& message);

    std::size_t offset() const noexcept { return offset_; }
    const std::vector<std::string>& expected() const noexcept { return expected_; }

private:
    std::size_t offset_;
    std::vector<std::string> expected_;
};

/// Parsed expression over the variables x, y, z, r, phi, t.
///
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := '-' unary | power
///   power   := primary ('^' unary)?
///   primary := number | variable | func '(' expr ')' | '(' expr ')'
///   func    := sin | cos | exp | abs | sqrt
class Expression {
public:
    struct Node;

    Expression();  // the constant 0
    static Expression parse(std::string_view source);
    static Expression constant(double value);

    double evaluate(const Variables& v) const;
    /// Canonical text: minimal parentheses, shortest round-trip numbers.
    std::string to_string() const;
    bool is_constant() const;  // no variable occurs
    bool depends_on_time() const;

private:
    explicit Expression(std::shared_ptr<const Node> root);
    std::shared_ptr<const Node> root_;
};

inline Expression parse_expression(std::string_view source) { return Expression::parse(source); }

}  // namespace lowdim
