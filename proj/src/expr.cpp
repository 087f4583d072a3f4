#include <lpakit/expr.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>

namespace lpakit::expr {

namespace {

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += items[i];
    }
    return out;
}

struct FunctionInfo {
    std::string_view name;
    Function fn;
    std::size_t arity;
};

constexpr std::array<FunctionInfo, 7> kFunctions{{
    {"exp", Function::Exp, 1},
    {"log", Function::Log, 1},
    {"sqrt", Function::Sqrt, 1},
    {"sech", Function::Sech, 1},
    {"abs", Function::Abs, 1},
    {"min", Function::Min, 2},
    {"max", Function::Max, 2},
}};

// Integral exponents use repeated multiplication so negative bases stay
// finite and results match hand-written kinetics bit for bit.
double power(double base, double exponent) {
    if (exponent == std::floor(exponent) && std::abs(exponent) <= 64.0) {
        auto n = static_cast<int>(std::abs(exponent));
        double result = 1.0;
        double b = base;
        while (n > 0) {
            if (n & 1) result *= b;
            b *= b;
            n >>= 1;
        }
        return exponent < 0 ? 1.0 / result : result;
    }
    return std::pow(base, exponent);
}

double apply(Function fn, double a, double b) {
    switch (fn) {
        case Function::Exp: return std::exp(a);
        case Function::Log: return a > 0.0 ? std::log(a) : (a == 0.0 ? -HUGE_VAL : std::nan(""));
        case Function::Sqrt: return std::sqrt(a);
        case Function::Sech: return 1.0 / std::cosh(a);
        case Function::Abs: return std::abs(a);
        case Function::Min: return std::min(a, b);
        case Function::Max: return std::max(a, b);
    }
    return std::nan("");
}

double apply(BinaryOp op, double a, double b) {
    switch (op) {
        case BinaryOp::Add: return a + b;
        case BinaryOp::Sub: return a - b;
        case BinaryOp::Mul: return a * b;
        case BinaryOp::Div: return a / b;
        case BinaryOp::Pow: return power(a, b);
    }
    return std::nan("");
}

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    Expr parse_all() {
        skip_space();
        if (pos_ >= text_.size()) fail("empty expression", {"number", "identifier", "'('", "'-'"});
        auto root = parse_sum();
        skip_space();
        if (pos_ < text_.size()) fail("unexpected trailing input", {"operator", "end of input"});
        return Expr(std::move(root));
    }

private:
    [[noreturn]] void fail(const std::string& what, std::vector<std::string> expected) {
        std::ostringstream msg;
        msg << "parse error at offset " << pos_ << ": " << what << " (expected " << join(expected) << ")";
        throw ParseError(msg.str(), pos_, std::move(expected));
    }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr parse_sum() {
        auto lhs = parse_product();
        for (;;) {
            if (accept('+')) {
                lhs = binary(BinaryOp::Add, lhs, parse_product());
            } else if (accept('-')) {
                lhs = binary(BinaryOp::Sub, lhs, parse_product());
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_product() {
        auto lhs = parse_unary();
        for (;;) {
            if (accept('*')) {
                lhs = binary(BinaryOp::Mul, lhs, parse_unary());
            } else if (accept('/')) {
                lhs = binary(BinaryOp::Div, lhs, parse_unary());
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_unary() {
        if (accept('-')) return negate(parse_unary());
        if (accept('+')) return parse_unary();
        return parse_power();
    }

    NodePtr parse_power() {
        auto base = parse_primary();
        if (accept('^')) return binary(BinaryOp::Pow, base, parse_unary());
        return base;
    }

    NodePtr parse_primary() {
        skip_space();
        if (pos_ >= text_.size()) fail("unexpected end of input", {"number", "identifier", "'('", "'-'"});
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            auto inner = parse_sum();
            if (!accept(')')) fail("unbalanced parenthesis", {"')'"});
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_name();
        fail(std::string("unexpected character '") + c + "'", {"number", "identifier", "'('", "'-'"});
    }

    NodePtr parse_number() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
            ++pos_;
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t look = pos_ + 1;
            if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) ++look;
            if (look < text_.size() && std::isdigit(static_cast<unsigned char>(text_[look]))) {
                pos_ = look;
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            }
        }
        double value = 0.0;
        const auto* first = text_.data() + start;
        const auto* last = text_.data() + pos_;
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc() || ptr != last) {
            pos_ = start;
            fail("malformed number", {"number"});
        }
        return number(value);
    }

    NodePtr parse_name() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
            ++pos_;
        }
        std::string name(text_.substr(start, pos_ - start));
        if (!accept('(')) return symbol(std::move(name));

        auto it = std::find_if(kFunctions.begin(), kFunctions.end(),
                               [&](const FunctionInfo& f) { return f.name == name; });
        if (it == kFunctions.end()) {
            pos_ = start;
            std::vector<std::string> known;
            for (const auto& f : kFunctions) known.emplace_back(f.name);
            fail("unknown function '" + name + "'", known);
        }
        std::vector<NodePtr> args;
        if (!accept(')')) {
            args.push_back(parse_sum());
            while (accept(',')) args.push_back(parse_sum());
            if (!accept(')')) fail("unterminated argument list", {"','", "')'"});
        }
        if (args.size() != it->arity) {
            pos_ = start;
            fail(name + " takes " + std::to_string(it->arity) + " argument(s), got " +
                     std::to_string(args.size()),
                 {std::to_string(it->arity) + " argument(s)"});
        }
        return call(it->fn, std::move(args));
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

// Printing precedence levels.
constexpr int kPrecSum = 1;
constexpr int kPrecProduct = 2;
constexpr int kPrecUnary = 3;
constexpr int kPrecPower = 4;
constexpr int kPrecAtom = 5;

int precedence(const Node& n) {
    if (const auto* b = std::get_if<Binary>(&n.data)) {
        switch (b->op) {
            case BinaryOp::Add:
            case BinaryOp::Sub: return kPrecSum;
            case BinaryOp::Mul:
            case BinaryOp::Div: return kPrecProduct;
            case BinaryOp::Pow: return kPrecPower;
        }
    }
    if (std::holds_alternative<Negate>(n.data)) return kPrecUnary;
    return kPrecAtom;
}

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s(buf);
    // Shortest representation that still round-trips.
    for (int digits = 1; digits < 17; ++digits) {
        std::snprintf(buf, sizeof buf, "%.*g", digits, v);
        if (std::strtod(buf, nullptr) == v) {
            s = buf;
            break;
        }
    }
    return s;
}

void print(const Node& n, std::string& out);

void print_child(const Node& child, bool parenthesize, std::string& out) {
    if (parenthesize) out += '(';
    print(child, out);
    if (parenthesize) out += ')';
}

void print(const Node& n, std::string& out) {
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Number>) {
                out += format_number(v.value);
            } else if constexpr (std::is_same_v<T, Symbol>) {
                out += v.name;
            } else if constexpr (std::is_same_v<T, Negate>) {
                out += '-';
                print_child(*v.operand, precedence(*v.operand) < kPrecUnary, out);
            } else if constexpr (std::is_same_v<T, Binary>) {
                const int p = precedence(n);
                const int lp = precedence(*v.lhs);
                const int rp = precedence(*v.rhs);
                if (v.op == BinaryOp::Pow) {
                    print_child(*v.lhs, lp <= kPrecPower, out);
                    out += '^';
                    print_child(*v.rhs, rp < kPrecUnary, out);
                } else {
                    // A leading negation is fine on the left of a sum but the
                    // right operand must bind tighter than the operator.
                    print_child(*v.lhs, lp < p, out);
                    switch (v.op) {
                        case BinaryOp::Add: out += " + "; break;
                        case BinaryOp::Sub: out += " - "; break;
                        case BinaryOp::Mul: out += '*'; break;
                        case BinaryOp::Div: out += '/'; break;
                        default: break;
                    }
                    const int min_rhs = (p == kPrecSum) ? kPrecProduct : kPrecUnary;
                    print_child(*v.rhs, rp < min_rhs, out);
                }
            } else if constexpr (std::is_same_v<T, Call>) {
                out += function_name(v.fn);
                out += '(';
                for (std::size_t i = 0; i < v.args.size(); ++i) {
                    if (i) out += ", ";
                    print(*v.args[i], out);
                }
                out += ')';
            }
        },
        n.data);
}

double eval_node(const Node& n, const Environment& env) {
    return std::visit(
        [&](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Number>) {
                return v.value;
            } else if constexpr (std::is_same_v<T, Symbol>) {
                auto it = env.find(v.name);
                if (it == env.end()) throw UnboundSymbolError(v.name);
                return it->second;
            } else if constexpr (std::is_same_v<T, Negate>) {
                return -eval_node(*v.operand, env);
            } else if constexpr (std::is_same_v<T, Binary>) {
                return apply(v.op, eval_node(*v.lhs, env), eval_node(*v.rhs, env));
            } else {
                const double a = eval_node(*v.args[0], env);
                const double b = v.args.size() > 1 ? eval_node(*v.args[1], env) : 0.0;
                return apply(v.fn, a, b);
            }
        },
        n.data);
}

void collect_symbols(const Node& n, std::set<std::string>& out) {
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Symbol>) {
                out.insert(v.name);
            } else if constexpr (std::is_same_v<T, Negate>) {
                collect_symbols(*v.operand, out);
            } else if constexpr (std::is_same_v<T, Binary>) {
                collect_symbols(*v.lhs, out);
                collect_symbols(*v.rhs, out);
            } else if constexpr (std::is_same_v<T, Call>) {
                for (const auto& a : v.args) collect_symbols(*a, out);
            }
        },
        n.data);
}

bool equal_nodes(const Node& a, const Node& b) {
    if (a.data.index() != b.data.index()) return false;
    return std::visit(
        [&](const auto& va) -> bool {
            using T = std::decay_t<decltype(va)>;
            const auto& vb = std::get<T>(b.data);
            if constexpr (std::is_same_v<T, Number>) {
                return va.value == vb.value;
            } else if constexpr (std::is_same_v<T, Symbol>) {
                return va.name == vb.name;
            } else if constexpr (std::is_same_v<T, Negate>) {
                return equal_nodes(*va.operand, *vb.operand);
            } else if constexpr (std::is_same_v<T, Binary>) {
                return va.op == vb.op && equal_nodes(*va.lhs, *vb.lhs) && equal_nodes(*va.rhs, *vb.rhs);
            } else {
                if (va.fn != vb.fn || va.args.size() != vb.args.size()) return false;
                for (std::size_t i = 0; i < va.args.size(); ++i) {
                    if (!equal_nodes(*va.args[i], *vb.args[i])) return false;
                }
                return true;
            }
        },
        a.data);
}

}  // namespace

ParseError::ParseError(const std::string& message, std::size_t offset, std::vector<std::string> expected)
    : Error(message), offset_(offset), expected_(std::move(expected)) {}

UnboundSymbolError::UnboundSymbolError(std::string name)
    : Error("unbound symbol '" + name + "'"), name_(std::move(name)) {}

NodePtr number(double value) { return std::make_shared<const Node>(Node{Number{value}}); }
NodePtr symbol(std::string name) { return std::make_shared<const Node>(Node{Symbol{std::move(name)}}); }
NodePtr negate(NodePtr operand) { return std::make_shared<const Node>(Node{Negate{std::move(operand)}}); }
NodePtr binary(BinaryOp op, NodePtr lhs, NodePtr rhs) {
    return std::make_shared<const Node>(Node{Binary{op, std::move(lhs), std::move(rhs)}});
}
NodePtr call(Function fn, std::vector<NodePtr> args) {
    return std::make_shared<const Node>(Node{Call{fn, std::move(args)}});
}

std::string_view function_name(Function fn) {
    for (const auto& f : kFunctions) {
        if (f.fn == fn) return f.name;
    }
    return "?";
}

std::size_t function_arity(Function fn) {
    for (const auto& f : kFunctions) {
        if (f.fn == fn) return f.arity;
    }
    return 0;
}

Expr parse(std::string_view text) { return Parser(text).parse_all(); }

double eval(const Expr& e, const Environment& env) { return eval_node(e.root(), env); }

std::set<std::string> free_symbols(const Expr& e) {
    std::set<std::string> out;
    collect_symbols(e.root(), out);
    return out;
}

std::string to_string(const Expr& e) {
    std::string out;
    print(e.root(), out);
    return out;
}

bool structurally_equal(const Expr& a, const Expr& b) { return equal_nodes(a.root(), b.root()); }

CompiledExpr::CompiledExpr(const Expr& e, const std::vector<std::string>& slots) {
    emit(e.root(), slots, 1);
}

void CompiledExpr::emit(const Node& n, const std::vector<std::string>& slots, int depth) {
    max_depth_ = std::max(max_depth_, depth);
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Number>) {
                code_.push_back({Op::Const, v.value, 0});
            } else if constexpr (std::is_same_v<T, Symbol>) {
                auto it = std::find(slots.begin(), slots.end(), v.name);
                if (it == slots.end()) throw UnboundSymbolError(v.name);
                code_.push_back({Op::Load, 0.0, static_cast<std::size_t>(it - slots.begin())});
            } else if constexpr (std::is_same_v<T, Negate>) {
                emit(*v.operand, slots, depth);
                code_.push_back({Op::Neg, 0.0, 0});
            } else if constexpr (std::is_same_v<T, Binary>) {
                emit(*v.lhs, slots, depth);
                emit(*v.rhs, slots, depth + 1);
                static constexpr Op ops[] = {Op::Add, Op::Sub, Op::Mul, Op::Div, Op::Pow};
                code_.push_back({ops[static_cast<int>(v.op)], 0.0, 0});
            } else {
                for (std::size_t i = 0; i < v.args.size(); ++i) emit(*v.args[i], slots, depth + static_cast<int>(i));
                static constexpr Op ops[] = {Op::Exp, Op::Log, Op::Sqrt, Op::Sech, Op::Abs, Op::Min, Op::Max};
                code_.push_back({ops[static_cast<int>(v.fn)], 0.0, 0});
            }
        },
        n.data);
}

double CompiledExpr::operator()(std::span<const double> values) const {
    constexpr int kInline = 64;
    std::array<double, kInline> inline_stack{};
    std::vector<double> heap_stack;
    double* stack = inline_stack.data();
    if (max_depth_ > kInline) {
        heap_stack.resize(static_cast<std::size_t>(max_depth_));
        stack = heap_stack.data();
    }
    int top = -1;
    for (const auto& ins : code_) {
        switch (ins.op) {
            case Op::Const: stack[++top] = ins.value; break;
            case Op::Load: stack[++top] = values[ins.slot]; break;
            case Op::Neg: stack[top] = -stack[top]; break;
            case Op::Add: --top; stack[top] += stack[top + 1]; break;
            case Op::Sub: --top; stack[top] -= stack[top + 1]; break;
            case Op::Mul: --top; stack[top] *= stack[top + 1]; break;
            case Op::Div: --top; stack[top] /= stack[top + 1]; break;
            case Op::Pow: --top; stack[top] = power(stack[top], stack[top + 1]); break;
            case Op::Exp: stack[top] = apply(Function::Exp, stack[top], 0.0); break;
            case Op::Log: stack[top] = apply(Function::Log, stack[top], 0.0); break;
            case Op::Sqrt: stack[top] = apply(Function::Sqrt, stack[top], 0.0); break;
            case Op::Sech: stack[top] = apply(Function::Sech, stack[top], 0.0); break;
            case Op::Abs: stack[top] = apply(Function::Abs, stack[top], 0.0); break;
            case Op::Min: --top; stack[top] = apply(Function::Min, stack[top], stack[top + 1]); break;
            case Op::Max: --top; stack[top] = apply(Function::Max, stack[top], stack[top + 1]); break;
        }
    }
    return stack[0];
}

}  // namespace lpakit::expr
