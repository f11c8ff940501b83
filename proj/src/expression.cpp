#include "jmlmc/expression.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>

#include "jmlmc/error.hpp"

namespace jmlmc {

namespace {

std::string format_constant(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

class Expression::Parser {
public:
    explicit Parser(const std::string& text) : text_(text) {}

    std::vector<Instr> run() {
        expr();
        skip_space();
        if (pos_ != text_.size()) {
            fail("unexpected character");
        }
        return std::move(out_);
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError("expression '" + text_ + "': " + what + " at column " + std::to_string(pos_ + 1));
    }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expr() {
        term();
        for (;;) {
            if (accept('+')) {
                term();
                out_.push_back({Op::add, 0.0});
            } else if (accept('-')) {
                term();
                out_.push_back({Op::sub, 0.0});
            } else {
                return;
            }
        }
    }

    void term() {
        unary();
        for (;;) {
            if (accept('*')) {
                unary();
                out_.push_back({Op::mul, 0.0});
            } else if (accept('/')) {
                unary();
                out_.push_back({Op::div, 0.0});
            } else {
                return;
            }
        }
    }

    void unary() {
        if (accept('-')) {
            unary();
            out_.push_back({Op::neg, 0.0});
        } else if (accept('+')) {
            unary();
        } else {
            power();
        }
    }

    void power() {
        primary();
        if (accept('^')) {
            unary();
            out_.push_back({Op::pow, 0.0});
        }
    }

    void primary() {
        skip_space();
        if (pos_ >= text_.size()) {
            fail("unexpected end of input");
        }
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            expr();
            if (!accept(')')) {
                fail("expected ')'");
            }
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = text_.c_str() + pos_;
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin) {
                fail("malformed number");
            }
            pos_ += static_cast<std::size_t>(end - begin);
            out_.push_back({Op::push, v});
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
                ++pos_;
            }
            const std::string name = text_.substr(start, pos_ - start);
            if (name == "x") {
                out_.push_back({Op::x, 0.0});
            } else if (name == "y") {
                out_.push_back({Op::y, 0.0});
            } else if (name == "t") {
                out_.push_back({Op::t, 0.0});
            } else if (name == "pi") {
                out_.push_back({Op::push, std::numbers::pi});
            } else {
                static const std::array<std::pair<const char*, Op>, 6> functions{{{"sin", Op::sin},
                                                                                  {"cos", Op::cos},
                                                                                  {"exp", Op::exp},
                                                                                  {"log", Op::log},
                                                                                  {"sqrt", Op::sqrt},
                                                                                  {"abs", Op::abs}}};
                for (const auto& [fname, op] : functions) {
                    if (name == fname) {
                        if (!accept('(')) {
                            fail("expected '(' after " + name);
                        }
                        expr();
                        if (!accept(')')) {
                            fail("expected ')'");
                        }
                        out_.push_back({op, 0.0});
                        return;
                    }
                }
                pos_ = start;
                fail("unknown identifier '" + name + "'");
            }
            return;
        }
        fail("unexpected character");
    }

    const std::string& text_;
    std::size_t pos_ = 0;
    std::vector<Instr> out_;
};

Expression::Expression(double constant)
    : text_(format_constant(constant)), program_{{Op::push, constant}}, constant_(true), value_(constant) {}

Expression Expression::parse(const std::string& text) {
    Expression e;
    e.text_ = text;
    e.program_ = Parser(text).run();
    std::size_t depth = 0;
    e.max_stack_ = 0;
    bool constant = true;
    for (const Instr& in : e.program_) {
        switch (in.op) {
            case Op::push:
            case Op::x:
            case Op::y:
            case Op::t:
                ++depth;
                break;
            case Op::add:
            case Op::sub:
            case Op::mul:
            case Op::div:
            case Op::pow:
                --depth;
                break;
            default:
                break;
        }
        if (in.op == Op::x || in.op == Op::y || in.op == Op::t) {
            constant = false;
        }
        if (in.op == Op::t) {
            e.time_dependent_ = true;
        }
        e.max_stack_ = std::max(e.max_stack_, depth);
    }
    if (e.max_stack_ > 64) {
        throw ConfigError("expression '" + text + "' is nested too deeply");
    }
    e.constant_ = false;
    e.value_ = constant ? e(0.0, 0.0, 0.0) : 0.0;
    e.constant_ = constant;
    return e;
}

double Expression::operator()(double x, double y, double t) const {
    if (constant_ && program_.size() == 1) {
        return value_;
    }
    std::array<double, 64> stack;
    std::size_t top = 0;
    for (const Instr& in : program_) {
        switch (in.op) {
            case Op::push: stack[top++] = in.value; break;
            case Op::x: stack[top++] = x; break;
            case Op::y: stack[top++] = y; break;
            case Op::t: stack[top++] = t; break;
            case Op::add: --top; stack[top - 1] += stack[top]; break;
            case Op::sub: --top; stack[top - 1] -= stack[top]; break;
            case Op::mul: --top; stack[top - 1] *= stack[top]; break;
            case Op::div: --top; stack[top - 1] /= stack[top]; break;
            case Op::pow: --top; stack[top - 1] = std::pow(stack[top - 1], stack[top]); break;
            case Op::neg: stack[top - 1] = -stack[top - 1]; break;
            case Op::sin: stack[top - 1] = std::sin(stack[top - 1]); break;
            case Op::cos: stack[top - 1] = std::cos(stack[top - 1]); break;
            case Op::exp: stack[top - 1] = std::exp(stack[top - 1]); break;
            case Op::log: stack[top - 1] = std::log(stack[top - 1]); break;
            case Op::sqrt: stack[top - 1] = std::sqrt(stack[top - 1]); break;
            case Op::abs: stack[top - 1] = std::abs(stack[top - 1]); break;
        }
    }
    return stack[0];
}

}  // namespace jmlmc
