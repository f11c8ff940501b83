#pragma once

#include <string>
#include <vector>

namespace jmlmc {

/// A scalar function of (x, y, t) parsed from a small grammar:
///
///   numbers, pi, x, y, t, + - * / ^ (right-associative), unary minus,
///   parentheses, and sin cos exp log sqrt abs.
///
/// Parsed once into a postfix program; evaluation does not allocate.
class Expression {
public:
    Expression() : Expression(0.0) {}
    explicit Expression(double constant);
    /// Throws ConfigError with the offending column on a syntax error.
    static Expression parse(const std::string& text);

    double operator()(double x, double y, double t = 0.0) const;

    const std::string& text() const { return text_; }
    bool is_constant() const { return constant_; }
    double constant_value() const { return value_; }
    bool time_dependent() const { return time_dependent_; }

    friend bool operator==(const Expression& a, const Expression& b) { return a.text_ == b.text_; }

private:
    enum class Op : unsigned char { push, x, y, t, add, sub, mul, div, pow, neg, sin, cos, exp, log, sqrt, abs };
    struct Instr {
        Op op;
        double value;
    };
    class Parser;

    std::string text_;
    std::vector<Instr> program_;
    std::size_t max_stack_ = 1;
    bool constant_ = true;
    bool time_dependent_ = false;
    double value_ = 0.0;
};

}  // namespace jmlmc
