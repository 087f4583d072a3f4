#pragma once

// Small arithmetic expression language used for user-defined kinetics.
//
// Grammar (lowest to highest precedence):
//   sum     := product (('+' | '-') product)*
//   product := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?          right associative
//   primary := number | name | name '(' args ')' | '(' sum ')'
//
// So "-x^2" is -(x^2) and "2^3^2" is 2^(3^2).

#include <lpakit/errors.hpp>

#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace lpakit::expr {

enum class BinaryOp { Add, Sub, Mul, Div, Pow };
enum class Function { Exp, Log, Sqrt, Sech, Abs, Min, Max };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Number {
    double value;  // always >= 0; negation is a separate node
};
struct Symbol {
    std::string name;
};
struct Negate {
    NodePtr operand;
};
struct Binary {
    BinaryOp op;
    NodePtr lhs;
    NodePtr rhs;
};
struct Call {
    Function fn;
    std::vector<NodePtr> args;
};

struct Node {
    std::variant<Number, Symbol, Negate, Binary, Call> data;
};

class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t offset, std::vector<std::string> expected);
    std::size_t offset() const { return offset_; }
    const std::vector<std::string>& expected() const { return expected_; }

private:
    std::size_t offset_;
    std::vector<std::string> expected_;
};

class UnboundSymbolError : public Error {
public:
    explicit UnboundSymbolError(std::string name);
    const std::string& name() const { return name_; }

private:
    std::string name_;
};

/// Immutable expression tree.
class Expr {
public:
    explicit Expr(NodePtr root) : root_(std::move(root)) {}
    const Node& root() const { return *root_; }
    const NodePtr& root_ptr() const { return root_; }

private:
    NodePtr root_;
};

// Node factories, mostly for tests and programmatic construction.
NodePtr number(double value);
NodePtr symbol(std::string name);
NodePtr negate(NodePtr operand);
NodePtr binary(BinaryOp op, NodePtr lhs, NodePtr rhs);
NodePtr call(Function fn, std::vector<NodePtr> args);

Expr parse(std::string_view text);

using Environment = std::map<std::string, double, std::less<>>;

/// Evaluates with IEEE semantics: division by zero, log of a nonpositive
/// number or a fractional power of a negative base give inf/nan rather
/// than throwing. Throws UnboundSymbolError for a missing binding.
double eval(const Expr& e, const Environment& env);

std::set<std::string> free_symbols(const Expr& e);

/// Minimal-parenthesis rendering that re-parses to the same tree.
std::string to_string(const Expr& e);

bool structurally_equal(const Expr& a, const Expr& b);

std::string_view function_name(Function fn);
std::size_t function_arity(Function fn);

/// An expression with its symbols resolved to slot indices, evaluated
/// against a flat array of values. Reentrant.
class CompiledExpr {
public:
    /// Throws UnboundSymbolError if a free symbol of `e` is not in `slots`.
    CompiledExpr(const Expr& e, const std::vector<std::string>& slots);

    double operator()(std::span<const double> values) const;

private:
    enum class Op : unsigned char {
        Const, Load, Neg, Add, Sub, Mul, Div, Pow, Exp, Log, Sqrt, Sech, Abs, Min, Max
    };
    struct Instr {
        Op op;
        double value;
        std::size_t slot;
    };
    void emit(const Node& n, const std::vector<std::string>& slots, int depth);

    std::vector<Instr> code_;
    int max_depth_ = 0;
};

}  // namespace lpakit::expr
