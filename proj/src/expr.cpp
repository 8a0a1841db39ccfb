#include "hoferlab/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace hoferlab {

namespace {

[[noreturn]] void fail(const std::string& text, size_t pos, const std::string& msg) {
    throw std::invalid_argument("expression error at position " + std::to_string(pos) +
                                " in \"" + text + "\": " + msg);
}

}  // namespace

class ExprParser {
public:
    ExprParser(const std::string& text, const std::vector<std::string>& vars, Expression& out)
        : text_(text), vars_(vars), out_(out) {}

    void run() {
        int root = parse_expr();
        skip_ws();
        if (pos_ != text_.size()) fail(text_, pos_, "unexpected trailing input");
        if (root < 0) fail(text_, pos_, "empty expression");
        out_.text_ = text_;
        out_.arity_ = static_cast<int>(vars_.size());
        (void)root;  // root is always the last emitted node
    }

private:
    const std::string& text_;
    const std::vector<std::string>& vars_;
    Expression& out_;
    size_t pos_ = 0;

    using Op = Expression::Op;

    int emit(Expression::Node n) {
        out_.code_.push_back(n);
        return static_cast<int>(out_.code_.size()) - 1;
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    int parse_expr() {
        int lhs = parse_term();
        for (;;) {
            if (eat('+'))
                lhs = emit({Op::Add, lhs, parse_term()});
            else if (eat('-'))
                lhs = emit({Op::Sub, lhs, parse_term()});
            else
                return lhs;
        }
    }

    int parse_term() {
        int lhs = parse_unary();
        for (;;) {
            if (eat('*'))
                lhs = emit({Op::Mul, lhs, parse_unary()});
            else if (eat('/'))
                lhs = emit({Op::Div, lhs, parse_unary()});
            else
                return lhs;
        }
    }

    int parse_unary() {
        if (eat('-')) return emit({Op::Neg, parse_unary()});
        if (eat('+')) return parse_unary();
        return parse_power();
    }

    int parse_power() {
        int base = parse_atom();
        if (eat('^')) {
            int exponent = parse_unary();  // right-associative, unary binds into exponent
            return emit({Op::Pow, base, exponent});
        }
        return base;
    }

    int parse_atom() {
        skip_ws();
        if (pos_ >= text_.size()) fail(text_, pos_, "expected operand");
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            int inner = parse_expr();
            if (!eat(')')) fail(text_, pos_, "expected ')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_name();
        fail(text_, pos_, "unexpected character '" + std::string(1, c) + "'");
    }

    int parse_number() {
        size_t start = pos_;
        const char* begin = text_.c_str() + pos_;
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        if (end == begin) fail(text_, start, "malformed number");
        pos_ += static_cast<size_t>(end - begin);
        Expression::Node n{Op::Const};
        n.value = v;
        return emit(n);
    }

    int parse_name() {
        size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        std::string name = text_.substr(start, pos_ - start);

        if (peek() == '(') {
            if (name == "exp" || name == "sin" || name == "cos") {
                eat('(');
                int arg = parse_expr();
                if (!eat(')')) fail(text_, pos_, "expected ')'");
                Op op = name == "exp" ? Op::Exp : name == "sin" ? Op::Sin : Op::Cos;
                return emit({op, arg});
            }
            if (name == "pow") {
                eat('(');
                int a = parse_expr();
                if (!eat(',')) fail(text_, pos_, "pow expects two arguments");
                int b = parse_expr();
                if (!eat(')')) fail(text_, pos_, "expected ')'");
                return emit({Op::Pow, a, b});
            }
            fail(text_, start, "unknown function '" + name + "'");
        }

        for (size_t i = 0; i < vars_.size(); ++i) {
            if (vars_[i] == name) {
                Expression::Node n{Op::Var};
                n.slot = static_cast<int>(i);
                return emit(n);
            }
        }
        fail(text_, start, "unknown variable '" + name + "'");
    }
};

Expression Expression::parse(const std::string& text, const std::vector<std::string>& variables) {
    Expression e;
    ExprParser(text, variables, e).run();
    return e;
}

double Expression::eval(std::span<const double> values) const {
    if (code_.empty()) throw std::logic_error("evaluating an empty expression");
    // Nodes are emitted in post-order, so a single pass suffices.
    double stackless[64];
    std::vector<double> heap;
    double* slots = stackless;
    if (code_.size() > 64) {
        heap.resize(code_.size());
        slots = heap.data();
    }
    for (size_t i = 0; i < code_.size(); ++i) {
        const Node& n = code_[i];
        double a = n.a >= 0 ? slots[n.a] : 0;
        double b = n.b >= 0 ? slots[n.b] : 0;
        double r = 0;
        switch (n.op) {
            case Op::Const: r = n.value; break;
            case Op::Var:
                if (n.slot >= static_cast<int>(values.size()))
                    throw std::invalid_argument("expression variable out of range");
                r = values[n.slot];
                break;
            case Op::Add: r = a + b; break;
            case Op::Sub: r = a - b; break;
            case Op::Mul: r = a * b; break;
            case Op::Div: r = a / b; break;
            case Op::Neg: r = -a; break;
            case Op::Pow: r = std::pow(a, b); break;
            case Op::Exp: r = std::exp(a); break;
            case Op::Sin: r = std::sin(a); break;
            case Op::Cos: r = std::cos(a); break;
        }
        slots[i] = r;
    }
    return slots[code_.size() - 1];
}

}  // namespace hoferlab
