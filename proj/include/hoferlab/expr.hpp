#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace hoferlab {

// Arithmetic expressions over named variables: +, -, *, /, ^ (or pow(a,b)),
// exp, sin, cos and numeric literals.  Used for custom bivector entries,
// custom Hamiltonians and time profiles.  Parse errors throw
// std::invalid_argument with a character position.
class Expression {
public:
    Expression() = default;

    // Variables resolve by name; slot i of the evaluation point feeds
    // variables[i].  Example: parse("x1*sin(x2)", {"x1","x2"}).
    static Expression parse(const std::string& text,
                            const std::vector<std::string>& variables);

    double eval(std::span<const double> values) const;
    double eval(double single) const {  // one-variable convenience (time profiles)
        return eval(std::span<const double>(&single, 1));
    }

    bool empty() const { return code_.empty(); }
    const std::string& text() const { return text_; }
    int arity() const { return arity_; }

private:
    enum class Op : uint8_t { Const, Var, Add, Sub, Mul, Div, Neg, Pow, Exp, Sin, Cos };
    struct Node {
        Op op;
        int a = -1, b = -1;  // child indices into code_
        double value = 0;    // Const payload
        int slot = -1;       // Var payload
    };
    std::vector<Node> code_;  // last node is the root
    std::string text_;
    int arity_ = 0;

    friend class ExprParser;
};

}  // namespace hoferlab
