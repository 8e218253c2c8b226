#include "orbsde/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace orbsde::expr {

namespace {

enum Opcode {
    op_const,
    op_var_x,
    op_var_y,
    op_var_z,
    op_neg,
    op_add,
    op_sub,
    op_mul,
    op_div,
    op_min,
    op_max,
    op_exp,
    op_abs,
    op_clamp,
};

struct Token {
    enum Kind { number, ident, symbol, end } kind;
    std::string text;
    double value = 0.0;
    int line = 1, column = 1;
};

class Lexer {
  public:
    explicit Lexer(const std::string& src) : src_(src) { advance(); }
    const Token& peek() const { return tok_; }
    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

  private:
    void advance() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) {
            if (src_[pos_] == '\n') {
                ++line_;
                col_ = 1;
            } else {
                ++col_;
            }
            ++pos_;
        }
        tok_.line = line_;
        tok_.column = col_;
        if (pos_ >= src_.size()) {
            tok_.kind = Token::end;
            tok_.text = "<end of input>";
            return;
        }
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && pos_ + 1 < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
            const char* begin = src_.c_str() + pos_;
            char* endp = nullptr;
            tok_.value = std::strtod(begin, &endp);
            const std::size_t len = static_cast<std::size_t>(endp - begin);
            tok_.kind = Token::number;
            tok_.text = src_.substr(pos_, len);
            pos_ += len;
            col_ += static_cast<int>(len);
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                          src_[pos_] == '_')) {
                ++pos_;
                ++col_;
            }
            tok_.kind = Token::ident;
            tok_.text = src_.substr(start, pos_ - start);
            return;
        }
        tok_.kind = Token::symbol;
        tok_.text = std::string(1, c);
        ++pos_;
        ++col_;
    }

    const std::string& src_;
    std::size_t pos_ = 0;
    int line_ = 1, col_ = 1;
    Token tok_;
};

NodePtr make_const(double v) {
    auto n = std::make_shared<Node>();
    n->tag = Tag::constant;
    n->value = v;
    return n;
}

class Parser {
  public:
    Parser(const std::string& src, const VariableSet& vars) : lex_(src), vars_(vars) {}

    NodePtr parse() {
        NodePtr e = expression();
        const Token& t = lex_.peek();
        if (t.kind != Token::end)
            throw ParseError("trailing token '" + t.text + "'", t.line, t.column);
        return e;
    }

  private:
    [[noreturn]] void fail(const std::string& msg, const Token& t) {
        throw ParseError(msg, t.line, t.column);
    }

    NodePtr expression() {
        NodePtr left = term();
        while (lex_.peek().kind == Token::symbol &&
               (lex_.peek().text == "+" || lex_.peek().text == "-")) {
            Token op = lex_.take();
            NodePtr right = term();
            auto n = std::make_shared<Node>();
            n->tag = Tag::binary;
            n->op = op.text[0];
            n->args = {left, right};
            left = n;
        }
        return left;
    }

    NodePtr term() {
        NodePtr left = factor();
        while (lex_.peek().kind == Token::symbol &&
               (lex_.peek().text == "*" || lex_.peek().text == "/")) {
            Token op = lex_.take();
            NodePtr right = factor();
            auto n = std::make_shared<Node>();
            n->tag = Tag::binary;
            n->op = op.text[0];
            n->args = {left, right};
            left = n;
        }
        return left;
    }

    NodePtr factor() {
        if (lex_.peek().kind == Token::symbol && lex_.peek().text == "-") {
            lex_.take();
            auto n = std::make_shared<Node>();
            n->tag = Tag::unary_minus;
            n->args = {factor()};
            return n;
        }
        return primary();
    }

    NodePtr primary() {
        Token t = lex_.take();
        if (t.kind == Token::number) return make_const(t.value);
        if (t.kind == Token::symbol && t.text == "(") {
            NodePtr e = expression();
            expect_symbol(")");
            return e;
        }
        if (t.kind == Token::ident) {
            if (lex_.peek().kind == Token::symbol && lex_.peek().text == "(")
                return call(t);
            return variable(t);
        }
        fail("unexpected token '" + t.text + "'", t);
    }

    NodePtr variable(const Token& t) {
        const std::string& s = t.text;
        const char kind = s[0];
        if ((kind == 'x' || kind == 'y' || kind == 'z') && s.size() > 1 &&
            std::all_of(s.begin() + 1, s.end(),
                        [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
            const int idx = std::atoi(s.c_str() + 1);
            const int limit = kind == 'x' ? vars_.n_x : kind == 'y' ? vars_.n_y : vars_.n_z;
            if (idx < 1 || idx > limit)
                fail("unknown identifier '" + s + "' (allowed: x1..x" + std::to_string(vars_.n_x) +
                         ", y1..y" + std::to_string(vars_.n_y) + ", z1..z" +
                         std::to_string(vars_.n_z) + ")",
                     t);
            auto n = std::make_shared<Node>();
            n->tag = Tag::variable;
            n->var_kind = kind;
            n->var_index = idx - 1;
            return n;
        }
        fail("unknown identifier '" + s + "'", t);
    }

    NodePtr call(const Token& name) {
        static const struct {
            const char* name;
            Fun fun;
            int arity;
        } table[] = {{"min", Fun::fmin, 2},
                     {"max", Fun::fmax, 2},
                     {"exp", Fun::fexp, 1},
                     {"abs", Fun::fabs, 1},
                     {"clamp", Fun::fclamp, 3}};
        const auto* entry = [&]() -> decltype(&table[0]) {
            for (const auto& e : table)
                if (name.text == e.name) return &e;
            return nullptr;
        }();
        if (!entry) fail("unknown function '" + name.text + "'", name);
        expect_symbol("(");
        std::vector<NodePtr> args;
        if (!(lex_.peek().kind == Token::symbol && lex_.peek().text == ")")) {
            args.push_back(expression());
            while (lex_.peek().kind == Token::symbol && lex_.peek().text == ",") {
                lex_.take();
                args.push_back(expression());
            }
        }
        Token closing = lex_.peek();
        expect_symbol(")");
        if (static_cast<int>(args.size()) != entry->arity)
            fail("function '" + name.text + "' expects " + std::to_string(entry->arity) +
                     " arguments, got " + std::to_string(args.size()),
                 closing);
        auto n = std::make_shared<Node>();
        n->tag = Tag::call;
        n->fun = entry->fun;
        n->args = std::move(args);
        return n;
    }

    void expect_symbol(const std::string& s) {
        const Token& t = lex_.peek();
        if (t.kind != Token::symbol || t.text != s)
            fail("expected '" + s + "', got '" + t.text + "'", t);
        lex_.take();
    }

    Lexer lex_;
    VariableSet vars_;
};

int precedence(const Node& n) {
    if (n.tag == Tag::binary) return (n.op == '+' || n.op == '-') ? 1 : 2;
    if (n.tag == Tag::unary_minus) return 3;
    return 4;
}

void print_node(std::ostream& os, const Node& n);

void print_child(std::ostream& os, const Node& parent, const Node& child, bool right_side) {
    const int pp = precedence(parent);
    const int cp = precedence(child);
    bool parens = cp < pp;
    // right operands of equal precedence keep their parentheses so the tree
    // shape survives a reparse (parsing is left-associative)
    if (!parens && right_side && cp == pp && parent.tag == Tag::binary) parens = true;
    // -(x) needs parens when the operand is a sum/product to survive reparsing
    if (parent.tag == Tag::unary_minus && child.tag == Tag::binary) parens = true;
    if (parens) os << '(';
    print_node(os, child);
    if (parens) os << ')';
}

void print_node(std::ostream& os, const Node& n) {
    switch (n.tag) {
        case Tag::constant: {
            std::ostringstream tmp;
            tmp.precision(17);
            tmp << n.value;
            std::string s = tmp.str();
            if (!s.empty() && s[0] == '-') {
                os << '(' << s << ')';  // negative literals reparse as unary minus otherwise
            } else {
                os << s;
            }
            break;
        }
        case Tag::variable:
            os << n.var_kind << (n.var_index + 1);
            break;
        case Tag::unary_minus:
            os << '-';
            print_child(os, n, *n.args[0], false);
            break;
        case Tag::binary:
            print_child(os, n, *n.args[0], false);
            os << ' ' << n.op << ' ';
            print_child(os, n, *n.args[1], true);
            break;
        case Tag::call: {
            static const char* names[] = {"min", "max", "exp", "abs", "clamp"};
            os << names[static_cast<int>(n.fun)] << '(';
            for (std::size_t i = 0; i < n.args.size(); ++i) {
                if (i) os << ", ";
                print_node(os, *n.args[i]);
            }
            os << ')';
            break;
        }
    }
}

}  // namespace

Expression::Expression(NodePtr root, VariableSet vars) : root_(std::move(root)), vars_(vars) {
    // flatten to postfix once; evaluation is a tight loop over the program
    struct Frame {
        const Node* node;
        std::size_t next_arg;
    };
    std::vector<Frame> stack{{root_.get(), 0}};
    int depth = 0, max_depth = 0;
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next_arg < f.node->args.size()) {
            const Node* child = f.node->args[f.next_arg].get();
            ++f.next_arg;
            stack.push_back({child, 0});  // invalidates f
            continue;
        }
        const Node& n = *f.node;
        Instr ins{};
        switch (n.tag) {
            case Tag::constant:
                ins.op = op_const;
                ins.val = n.value;
                ++depth;
                break;
            case Tag::variable:
                ins.op = n.var_kind == 'x' ? op_var_x : n.var_kind == 'y' ? op_var_y : op_var_z;
                ins.index = n.var_index;
                ++depth;
                break;
            case Tag::unary_minus:
                ins.op = op_neg;
                break;
            case Tag::binary:
                ins.op = n.op == '+'   ? op_add
                         : n.op == '-' ? op_sub
                         : n.op == '*' ? op_mul
                                       : op_div;
                --depth;
                break;
            case Tag::call:
                switch (n.fun) {
                    case Fun::fmin: ins.op = op_min; --depth; break;
                    case Fun::fmax: ins.op = op_max; --depth; break;
                    case Fun::fexp: ins.op = op_exp; break;
                    case Fun::fabs: ins.op = op_abs; break;
                    case Fun::fclamp: ins.op = op_clamp; depth -= 2; break;
                }
                break;
        }
        max_depth = std::max(max_depth, depth);
        program_.push_back(ins);
        stack.pop_back();
    }
    stack_need_ = max_depth;
}

double Expression::eval(std::span<const double> x, std::span<const double> y,
                        std::span<const double> z) const {
    double local[16] = {0.0};
    std::vector<double> heap;
    double* s = local;
    if (stack_need_ > 16) {
        heap.resize(stack_need_);
        s = heap.data();
    }
    int top = 0;
    for (const Instr& ins : program_) {
        switch (ins.op) {
            case op_const: s[top++] = ins.val; break;
            case op_var_x: s[top++] = x[ins.index]; break;
            case op_var_y: s[top++] = y[ins.index]; break;
            case op_var_z: s[top++] = z[ins.index]; break;
            case op_neg: s[top - 1] = -s[top - 1]; break;
            case op_add: s[top - 2] += s[top - 1]; --top; break;
            case op_sub: s[top - 2] -= s[top - 1]; --top; break;
            case op_mul: s[top - 2] *= s[top - 1]; --top; break;
            case op_div: s[top - 2] /= s[top - 1]; --top; break;
            case op_min: s[top - 2] = std::fmin(s[top - 2], s[top - 1]); --top; break;
            case op_max: s[top - 2] = std::fmax(s[top - 2], s[top - 1]); --top; break;
            case op_exp: s[top - 1] = std::exp(s[top - 1]); break;
            case op_abs: s[top - 1] = std::fabs(s[top - 1]); break;
            case op_clamp:
                s[top - 3] = std::fmin(std::fmax(s[top - 3], s[top - 2]), s[top - 1]);
                top -= 2;
                break;
        }
    }
    return s[0];
}

std::string Expression::pretty() const {
    std::ostringstream os;
    print_node(os, *root_);
    return os.str();
}

bool Expression::uses(char kind) const {
    bool found = false;
    std::vector<const Node*> stack{root_.get()};
    while (!stack.empty() && !found) {
        const Node* n = stack.back();
        stack.pop_back();
        if (n->tag == Tag::variable && n->var_kind == kind) found = true;
        for (const auto& a : n->args) stack.push_back(a.get());
    }
    return found;
}

bool Expression::is_constant_zero() const {
    return root_ && root_->tag == Tag::constant && root_->value == 0.0;
}

Expression parse_expression(const std::string& source, const VariableSet& vars) {
    Parser p(source, vars);
    return Expression(p.parse(), vars);
}

bool equal_trees(const NodePtr& a, const NodePtr& b) {
    if (!a || !b) return a == b;
    if (a->tag != b->tag) return false;
    switch (a->tag) {
        case Tag::constant:
            if (a->value != b->value) return false;
            break;
        case Tag::variable:
            if (a->var_kind != b->var_kind || a->var_index != b->var_index) return false;
            break;
        case Tag::binary:
            if (a->op != b->op) return false;
            break;
        case Tag::call:
            if (a->fun != b->fun) return false;
            break;
        case Tag::unary_minus:
            break;
    }
    if (a->args.size() != b->args.size()) return false;
    for (std::size_t i = 0; i < a->args.size(); ++i)
        if (!equal_trees(a->args[i], b->args[i])) return false;
    return true;
}

}  // namespace orbsde::expr
