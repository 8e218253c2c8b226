#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace orbsde::expr {

struct ParseError : std::runtime_error {
    int line;
    int column;
    ParseError(const std::string& msg, int ln, int col)
        : std::runtime_error(msg + " at line " + std::to_string(ln) + ", column " +
                             std::to_string(col)),
          line(ln),
          column(col) {}
};

enum class Tag { constant, variable, unary_minus, binary, call };
enum class Fun { fmin, fmax, fexp, fabs, fclamp };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    Tag tag;
    double value = 0.0;           // constant
    char var_kind = 0;            // 'x', 'y' or 'z'
    int var_index = 0;            // 0-based
    char op = 0;                  // '+', '-', '*', '/'
    Fun fun = Fun::fmin;
    std::vector<NodePtr> args;
};

// Which variables an expression may reference.  A zero count rejects that
// variable family entirely (e.g. terminal conditions see only x1..xm).
struct VariableSet {
    int n_x = 0;
    int n_y = 0;
    int n_z = 0;
};

class Expression {
  public:
    Expression() = default;
    explicit Expression(NodePtr root, VariableSet vars);

    double eval(std::span<const double> x, std::span<const double> y = {},
                std::span<const double> z = {}) const;

    std::string pretty() const;
    const NodePtr& root() const { return root_; }
    const VariableSet& variables() const { return vars_; }
    bool uses(char kind) const;
    bool is_constant_zero() const;

  private:
    struct Instr {
        int op;      // opcode
        int index;   // variable index / argument count
        double val;  // constant payload
    };
    NodePtr root_;
    VariableSet vars_;
    std::vector<Instr> program_;  // postfix form, evaluated on a small stack
    int stack_need_ = 0;
};

Expression parse_expression(const std::string& source, const VariableSet& vars);

bool equal_trees(const NodePtr& a, const NodePtr& b);

}  // namespace orbsde::expr
