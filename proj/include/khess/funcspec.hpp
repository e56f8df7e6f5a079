#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace khess {

/// A named real function usable inside expressions, e.g. exp or pow.
struct Intrinsic {
  std::string name;
  int arity = 1;
  std::function<double(std::span<const double>)> fn;
};

/// Set of intrinsics known to the parser. The builtin registry holds
/// exp, log, sqrt and pow; copies can be extended with further functions.
class IntrinsicRegistry {
 public:
  static const IntrinsicRegistry& builtin();

  void add(std::string name, int arity, std::function<double(std::span<const double>)> fn);
  std::shared_ptr<const Intrinsic> find(std::string_view name) const;

 private:
  std::map<std::string, std::shared_ptr<const Intrinsic>, std::less<>> table_;
};

/// Immutable expression tree over a fixed list of variables.
class Expression {
 public:
  enum class Kind { number, variable, negate, add, subtract, multiply, divide, power, call };

  struct Node {
    Kind kind = Kind::number;
    double value = 0.0;  // number
    int variable = -1;   // variable index
    std::shared_ptr<const Intrinsic> intrinsic;
    std::vector<std::shared_ptr<const Node>> children;
  };
  using NodePtr = std::shared_ptr<const Node>;

  Expression() = default;
  Expression(NodePtr root, std::vector<std::string> variables)
      : root_(std::move(root)), variables_(std::move(variables)) {}

  /// Parses `text` with standard precedence: `^` binds tightest and is
  /// right-associative, unary minus sits below `^`, then `* /`, then `+ -`.
  static Expression parse(std::string_view text, std::vector<std::string> variables,
                          const IntrinsicRegistry& registry = IntrinsicRegistry::builtin());

  /// Raw value; may be NaN or infinite for arguments outside the domain.
  double evaluate(std::span<const double> args) const;

  /// Text that parses back to an identical tree.
  std::string print() const;

  const NodePtr& root() const noexcept { return root_; }
  const std::vector<std::string>& variables() const noexcept { return variables_; }

  friend bool operator==(const Expression& a, const Expression& b);

  // Node builders that keep the parser's canonical form (negative constants
  // become negate(number)).
  static NodePtr number(double v);
  static NodePtr variable(int index);
  static NodePtr unary(Kind kind, NodePtr operand);
  static NodePtr binary(Kind kind, NodePtr lhs, NodePtr rhs);
  static NodePtr call(std::shared_ptr<const Intrinsic> fn, std::vector<NodePtr> args);

 private:
  NodePtr root_;
  std::vector<std::string> variables_;
};

bool operator==(const Expression::Node& a, const Expression::Node& b);

enum class Preset1D { constant, power, decay, exponential };
enum class Preset2D { constant, sum_power, product_power };

/// Radial coefficient t -> g(t): a parsed expression in `t`, or a preset
/// family written `preset:NAME(params...)`:
///   constant(c)         c
///   power(c, alpha)     c*t^alpha
///   decay(c, alpha)     c/(1+t)^alpha
///   exponential(c, beta) c*exp(beta*t)
class FuncSpec1D {
 public:
  FuncSpec1D();  // the zero function

  static FuncSpec1D parse(std::string_view text,
                          const IntrinsicRegistry& registry = IntrinsicRegistry::builtin());
  static FuncSpec1D preset(Preset1D family, std::vector<double> params);

  /// Uses the closed form for presets, the tree otherwise.
  double operator()(double t) const;
  /// Throws DomainError when the value is not finite.
  double checked(double t) const;

  const std::string& source_text() const noexcept { return source_; }
  const Expression& ast() const noexcept { return ast_; }
  std::optional<Preset1D> preset_family() const noexcept { return family_; }
  const std::vector<double>& preset_params() const noexcept { return params_; }
  /// True when the function is a constant (tree is a single number or constant preset).
  std::optional<double> constant_value() const;

 private:
  std::string source_;
  Expression ast_;
  std::optional<Preset1D> family_;
  std::vector<double> params_;
};

/// Nonlinearity (u, v) -> f(u, v); presets:
///   constant(c)                 c
///   sum_power(c, gamma)         c*(u+v)^gamma
///   product_power(c, alpha, beta) c*u^alpha*v^beta
class FuncSpec2D {
 public:
  FuncSpec2D();

  static FuncSpec2D parse(std::string_view text,
                          const IntrinsicRegistry& registry = IntrinsicRegistry::builtin());
  static FuncSpec2D preset(Preset2D family, std::vector<double> params);

  double operator()(double u, double v) const;
  double checked(double u, double v) const;

  const std::string& source_text() const noexcept { return source_; }
  const Expression& ast() const noexcept { return ast_; }
  std::optional<Preset2D> preset_family() const noexcept { return family_; }
  const std::vector<double>& preset_params() const noexcept { return params_; }
  std::optional<double> constant_value() const;

 private:
  std::string source_;
  Expression ast_;
  std::optional<Preset2D> family_;
  std::vector<double> params_;
};

FuncSpec1D parse_func_1d(std::string_view text);
FuncSpec2D parse_func_2d(std::string_view text);

/// Worst decrease seen between lattice neighbours.
struct MonotoneViolation {
  double amount = 0.0;  // f(next) - f(prev), negative
  double u = 0.0;
  double v = 0.0;
  char axis = 'u';
};

struct MonotoneReport {
  bool is_nondecreasing_u = true;
  bool is_nondecreasing_v = true;
  std::optional<MonotoneViolation> worst_violation;
  double min_value = 0.0;
  std::size_t samples_used = 0;
};

/// Samples f on an n-by-n lattice over [0,U]x[0,V] and flags decreases
/// larger than 1e-12 (relative to max(1,|f|)) between axis neighbours.
MonotoneReport check_c1_monotone(const FuncSpec2D& f, double U, double V, int n = 50);

}  // namespace khess
