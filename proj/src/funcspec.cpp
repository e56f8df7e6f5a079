#include "khess/funcspec.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

#include "khess/error.hpp"

namespace khess {

namespace {

using Kind = Expression::Kind;
using NodePtr = Expression::NodePtr;

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Recursive-descent parser over a byte buffer.
//   expr    := term { ('+'|'-') term }
//   term    := unary { ('*'|'/') unary }
//   unary   := '-' unary | '+' unary | power
//   power   := primary [ '^' unary ]
//   primary := number | ident | ident '(' expr {',' expr} ')' | '(' expr ')'
class Parser {
 public:
  Parser(std::string_view text, const std::vector<std::string>& variables,
         const IntrinsicRegistry& registry)
      : text_(text), variables_(variables), registry_(registry) {}

  NodePtr parse() {
    skip_space();
    if (pos_ == text_.size()) throw ParseError("empty expression", pos_);
    NodePtr root = expr();
    skip_space();
    if (pos_ != text_.size()) throw ParseError("unexpected character '" + std::string(1, text_[pos_]) + "'", pos_);
    return root;
  }

 private:
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

  NodePtr expr() {
    NodePtr lhs = term();
    while (true) {
      if (accept('+')) {
        lhs = Expression::binary(Kind::add, lhs, term());
      } else if (accept('-')) {
        lhs = Expression::binary(Kind::subtract, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    while (true) {
      if (accept('*')) {
        lhs = Expression::binary(Kind::multiply, lhs, unary());
      } else if (accept('/')) {
        lhs = Expression::binary(Kind::divide, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return Expression::unary(Kind::negate, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return Expression::binary(Kind::power, base, unary());
    return base;
  }

  NodePtr primary() {
    skip_space();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of expression", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = expr();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    throw ParseError("unexpected character '" + std::string(1, c) + "'", pos_);
  }

  NodePtr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
        ++n;
      }
      return n;
    };
    std::size_t n = digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      n += digits();
    }
    if (n == 0) throw ParseError("malformed number", start);
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) ++look;
      if (look < text_.size() && std::isdigit(static_cast<unsigned char>(text_[look]))) {
        pos_ = look;
        digits();
      }
    }
    const std::string literal(text_.substr(start, pos_ - start));
    return Expression::number(std::strtod(literal.c_str(), nullptr));
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view name = text_.substr(start, pos_ - start);
    if (accept('(')) {
      auto fn = registry_.find(name);
      if (!fn) throw ParseError("unknown function '" + std::string(name) + "'", start);
      std::vector<NodePtr> args;
      if (!accept(')')) {
        do {
          args.push_back(expr());
        } while (accept(','));
        if (!accept(')')) throw ParseError("expected ')' after arguments", pos_);
      }
      if (static_cast<int>(args.size()) != fn->arity) {
        throw ParseError("function '" + std::string(name) + "' takes " + std::to_string(fn->arity) +
                             " argument(s)",
                         start);
      }
      return Expression::call(std::move(fn), std::move(args));
    }
    for (std::size_t i = 0; i < variables_.size(); ++i) {
      if (variables_[i] == name) return Expression::variable(static_cast<int>(i));
    }
    throw ParseError("unknown identifier '" + std::string(name) + "'", start);
  }

  std::string_view text_;
  const std::vector<std::string>& variables_;
  const IntrinsicRegistry& registry_;
  std::size_t pos_ = 0;
};

int precedence(const Expression::Node& n) {
  switch (n.kind) {
    case Kind::add:
    case Kind::subtract:
      return 1;
    case Kind::multiply:
    case Kind::divide:
      return 2;
    case Kind::negate:
      return 3;
    case Kind::power:
      return 4;
    default:
      return 5;
  }
}

void print_node(const Expression::Node& n, const std::vector<std::string>& vars, std::string& out);

void print_child(const Expression::Node& n, int min_prec, const std::vector<std::string>& vars,
                 std::string& out) {
  if (precedence(n) < min_prec) {
    out += '(';
    print_node(n, vars, out);
    out += ')';
  } else {
    print_node(n, vars, out);
  }
}

void print_node(const Expression::Node& n, const std::vector<std::string>& vars, std::string& out) {
  switch (n.kind) {
    case Kind::number:
      out += format_number(n.value);
      return;
    case Kind::variable:
      out += vars.at(static_cast<std::size_t>(n.variable));
      return;
    case Kind::negate:
      out += '-';
      print_child(*n.children[0], 3, vars, out);
      return;
    case Kind::add:
    case Kind::subtract:
      print_child(*n.children[0], 1, vars, out);
      out += n.kind == Kind::add ? '+' : '-';
      print_child(*n.children[1], 2, vars, out);
      return;
    case Kind::multiply:
    case Kind::divide:
      print_child(*n.children[0], 2, vars, out);
      out += n.kind == Kind::multiply ? '*' : '/';
      print_child(*n.children[1], 3, vars, out);
      return;
    case Kind::power:
      print_child(*n.children[0], 5, vars, out);
      out += '^';
      print_child(*n.children[1], 3, vars, out);
      return;
    case Kind::call:
      out += n.intrinsic->name;
      out += '(';
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        if (i) out += ", ";
        print_node(*n.children[i], vars, out);
      }
      out += ')';
      return;
  }
}

double eval_node(const Expression::Node& n, std::span<const double> args) {
  switch (n.kind) {
    case Kind::number:
      return n.value;
    case Kind::variable:
      return args[static_cast<std::size_t>(n.variable)];
    case Kind::negate:
      return -eval_node(*n.children[0], args);
    case Kind::add:
      return eval_node(*n.children[0], args) + eval_node(*n.children[1], args);
    case Kind::subtract:
      return eval_node(*n.children[0], args) - eval_node(*n.children[1], args);
    case Kind::multiply:
      return eval_node(*n.children[0], args) * eval_node(*n.children[1], args);
    case Kind::divide:
      return eval_node(*n.children[0], args) / eval_node(*n.children[1], args);
    case Kind::power:
      return std::pow(eval_node(*n.children[0], args), eval_node(*n.children[1], args));
    case Kind::call: {
      double buf[8];
      const std::size_t m = std::min<std::size_t>(n.children.size(), 8);
      for (std::size_t i = 0; i < m; ++i) buf[i] = eval_node(*n.children[i], args);
      return n.intrinsic->fn(std::span<const double>(buf, m));
    }
  }
  return std::nan("");
}

// "preset:name(a, b, ...)" -> (name, params); nullopt when text is not a preset.
std::optional<std::pair<std::string, std::vector<double>>> split_preset(std::string_view text) {
  auto trimmed = text;
  while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.front()))) trimmed.remove_prefix(1);
  while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back()))) trimmed.remove_suffix(1);
  constexpr std::string_view tag = "preset:";
  if (trimmed.substr(0, tag.size()) != tag) return std::nullopt;
  const std::size_t offset = static_cast<std::size_t>(trimmed.data() - text.data());
  auto body = trimmed.substr(tag.size());
  const auto open = body.find('(');
  if (open == std::string_view::npos || body.back() != ')') {
    throw ParseError("preset must be written preset:name(params)", offset);
  }
  std::string name(body.substr(0, open));
  name.erase(std::remove_if(name.begin(), name.end(), [](unsigned char ch) { return std::isspace(ch); }),
             name.end());
  std::vector<double> params;
  // Parameters may be any constant expression, e.g. preset:decay(1, 3/2).
  auto inner = body.substr(open + 1, body.size() - open - 2);
  if (inner.find_first_not_of(" \t") == std::string_view::npos) return std::make_pair(std::move(name), params);
  std::size_t start = 0;
  while (true) {
    auto comma = inner.find(',', start);
    const bool last = comma == std::string_view::npos;
    if (last) comma = inner.size();
    const std::size_t where = offset + tag.size() + open + 1 + start;
    try {
      params.push_back(Expression::parse(inner.substr(start, comma - start), {}).evaluate({}));
    } catch (const ParseError& e) {
      throw ParseError("bad preset parameter", where + e.offset());
    }
    if (last) break;
    start = comma + 1;
  }
  return std::make_pair(std::move(name), std::move(params));
}

void require_params(const std::string& family, const std::vector<double>& params, std::size_t count) {
  if (params.size() != count) {
    throw UsageError("preset '" + family + "' takes " + std::to_string(count) + " parameter(s), got " +
                     std::to_string(params.size()));
  }
}

const std::vector<std::string>& vars_1d() {
  static const std::vector<std::string> v{"t"};
  return v;
}

const std::vector<std::string>& vars_2d() {
  static const std::vector<std::string> v{"u", "v"};
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------

const IntrinsicRegistry& IntrinsicRegistry::builtin() {
  static const IntrinsicRegistry registry = [] {
    IntrinsicRegistry r;
    r.add("exp", 1, [](std::span<const double> a) { return std::exp(a[0]); });
    r.add("log", 1, [](std::span<const double> a) { return std::log(a[0]); });
    r.add("sqrt", 1, [](std::span<const double> a) { return std::sqrt(a[0]); });
    r.add("pow", 2, [](std::span<const double> a) { return std::pow(a[0], a[1]); });
    return r;
  }();
  return registry;
}

void IntrinsicRegistry::add(std::string name, int arity, std::function<double(std::span<const double>)> fn) {
  if (arity < 0 || arity > 8) throw UsageError("intrinsic arity must be in [0, 8]");
  auto entry = std::make_shared<Intrinsic>(Intrinsic{name, arity, std::move(fn)});
  table_[std::move(name)] = std::move(entry);
}

std::shared_ptr<const Intrinsic> IntrinsicRegistry::find(std::string_view name) const {
  auto it = table_.find(name);
  return it == table_.end() ? nullptr : it->second;
}

// ---------------------------------------------------------------------------

Expression Expression::parse(std::string_view text, std::vector<std::string> variables,
                             const IntrinsicRegistry& registry) {
  Parser parser(text, variables, registry);
  NodePtr root = parser.parse();
  return Expression(std::move(root), std::move(variables));
}

double Expression::evaluate(std::span<const double> args) const {
  if (!root_) return 0.0;
  return eval_node(*root_, args);
}

std::string Expression::print() const {
  if (!root_) return "0";
  std::string out;
  print_node(*root_, variables_, out);
  return out;
}

Expression::NodePtr Expression::number(double v) {
  if (std::signbit(v) && v != 0.0) return unary(Kind::negate, number(-v));
  auto n = std::make_shared<Node>();
  n->kind = Kind::number;
  n->value = v == 0.0 ? 0.0 : v;
  return n;
}

Expression::NodePtr Expression::variable(int index) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::variable;
  n->variable = index;
  return n;
}

Expression::NodePtr Expression::unary(Kind kind, NodePtr operand) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->children.push_back(std::move(operand));
  return n;
}

Expression::NodePtr Expression::binary(Kind kind, NodePtr lhs, NodePtr rhs) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->children.push_back(std::move(lhs));
  n->children.push_back(std::move(rhs));
  return n;
}

Expression::NodePtr Expression::call(std::shared_ptr<const Intrinsic> fn, std::vector<NodePtr> args) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::call;
  n->intrinsic = std::move(fn);
  n->children = std::move(args);
  return n;
}

bool operator==(const Expression::Node& a, const Expression::Node& b) {
  if (a.kind != b.kind || a.children.size() != b.children.size()) return false;
  switch (a.kind) {
    case Kind::number:
      if (a.value != b.value) return false;
      break;
    case Kind::variable:
      if (a.variable != b.variable) return false;
      break;
    case Kind::call:
      if (a.intrinsic->name != b.intrinsic->name) return false;
      break;
    default:
      break;
  }
  for (std::size_t i = 0; i < a.children.size(); ++i) {
    if (!(*a.children[i] == *b.children[i])) return false;
  }
  return true;
}

bool operator==(const Expression& a, const Expression& b) {
  if (a.variables_ != b.variables_) return false;
  if (!a.root_ || !b.root_) return a.root_ == b.root_;
  return *a.root_ == *b.root_;
}

// ---------------------------------------------------------------------------

FuncSpec1D::FuncSpec1D() : source_("0"), ast_(Expression::number(0.0), vars_1d()) {}

FuncSpec1D FuncSpec1D::parse(std::string_view text, const IntrinsicRegistry& registry) {
  if (auto preset_text = split_preset(text)) {
    const auto& [name, params] = *preset_text;
    Preset1D family;
    if (name == "constant") {
      family = Preset1D::constant;
    } else if (name == "power") {
      family = Preset1D::power;
    } else if (name == "decay") {
      family = Preset1D::decay;
    } else if (name == "exponential") {
      family = Preset1D::exponential;
    } else {
      throw ParseError("unknown preset '" + name + "'", 0);
    }
    FuncSpec1D f = preset(family, params);
    f.source_ = std::string(text);
    return f;
  }
  FuncSpec1D f;
  f.source_ = std::string(text);
  f.ast_ = Expression::parse(text, vars_1d(), registry);
  return f;
}

FuncSpec1D FuncSpec1D::preset(Preset1D family, std::vector<double> params) {
  const auto& reg = IntrinsicRegistry::builtin();
  FuncSpec1D f;
  f.family_ = family;
  NodePtr t = Expression::variable(0);
  NodePtr root;
  switch (family) {
    case Preset1D::constant:
      require_params("constant", params, 1);
      root = Expression::number(params[0]);
      break;
    case Preset1D::power:
      require_params("power", params, 2);
      root = Expression::binary(Kind::multiply, Expression::number(params[0]),
                                Expression::binary(Kind::power, t, Expression::number(params[1])));
      break;
    case Preset1D::decay:
      require_params("decay", params, 2);
      root = Expression::binary(
          Kind::divide, Expression::number(params[0]),
          Expression::binary(Kind::power, Expression::binary(Kind::add, Expression::number(1.0), t),
                             Expression::number(params[1])));
      break;
    case Preset1D::exponential:
      require_params("exponential", params, 2);
      root = Expression::binary(
          Kind::multiply, Expression::number(params[0]),
          Expression::call(reg.find("exp"),
                           {Expression::binary(Kind::multiply, Expression::number(params[1]), t)}));
      break;
  }
  f.ast_ = Expression(root, vars_1d());
  f.params_ = std::move(params);
  f.source_ = f.ast_.print();
  return f;
}

double FuncSpec1D::operator()(double t) const {
  if (!family_) {
    const double args[1] = {t};
    return ast_.evaluate(args);
  }
  const auto& c = params_;
  switch (*family_) {
    case Preset1D::constant:
      return c[0];
    case Preset1D::power:
      return c[0] * std::pow(t, c[1]);
    case Preset1D::decay:
      return c[0] / std::pow(1.0 + t, c[1]);
    case Preset1D::exponential:
      return c[0] * std::exp(c[1] * t);
  }
  return std::nan("");
}

double FuncSpec1D::checked(double t) const {
  const double v = (*this)(t);
  if (!std::isfinite(v)) {
    throw DomainError("'" + source_ + "' is not finite at t=" + format_number(t));
  }
  return v;
}

std::optional<double> FuncSpec1D::constant_value() const {
  if (family_ == Preset1D::constant) return params_[0];
  if (family_) return std::nullopt;
  const auto& root = ast_.root();
  if (root->kind == Kind::number) return root->value;
  if (root->kind == Kind::negate && root->children[0]->kind == Kind::number) return -root->children[0]->value;
  return std::nullopt;
}

// ---------------------------------------------------------------------------

FuncSpec2D::FuncSpec2D() : source_("0"), ast_(Expression::number(0.0), vars_2d()) {}

FuncSpec2D FuncSpec2D::parse(std::string_view text, const IntrinsicRegistry& registry) {
  if (auto preset_text = split_preset(text)) {
    const auto& [name, params] = *preset_text;
    Preset2D family;
    if (name == "constant") {
      family = Preset2D::constant;
    } else if (name == "sum_power") {
      family = Preset2D::sum_power;
    } else if (name == "product_power") {
      family = Preset2D::product_power;
    } else {
      throw ParseError("unknown preset '" + name + "'", 0);
    }
    FuncSpec2D f = preset(family, params);
    f.source_ = std::string(text);
    return f;
  }
  FuncSpec2D f;
  f.source_ = std::string(text);
  f.ast_ = Expression::parse(text, vars_2d(), registry);
  return f;
}

FuncSpec2D FuncSpec2D::preset(Preset2D family, std::vector<double> params) {
  FuncSpec2D f;
  f.family_ = family;
  NodePtr u = Expression::variable(0);
  NodePtr v = Expression::variable(1);
  NodePtr root;
  switch (family) {
    case Preset2D::constant:
      require_params("constant", params, 1);
      root = Expression::number(params[0]);
      break;
    case Preset2D::sum_power:
      require_params("sum_power", params, 2);
      root = Expression::binary(Kind::multiply, Expression::number(params[0]),
                                Expression::binary(Kind::power, Expression::binary(Kind::add, u, v),
                                                   Expression::number(params[1])));
      break;
    case Preset2D::product_power:
      require_params("product_power", params, 3);
      root = Expression::binary(
          Kind::multiply,
          Expression::binary(Kind::multiply, Expression::number(params[0]),
                             Expression::binary(Kind::power, u, Expression::number(params[1]))),
          Expression::binary(Kind::power, v, Expression::number(params[2])));
      break;
  }
  f.ast_ = Expression(root, vars_2d());
  f.params_ = std::move(params);
  f.source_ = f.ast_.print();
  return f;
}

double FuncSpec2D::operator()(double u, double v) const {
  if (!family_) {
    const double args[2] = {u, v};
    return ast_.evaluate(args);
  }
  const auto& c = params_;
  switch (*family_) {
    case Preset2D::constant:
      return c[0];
    case Preset2D::sum_power:
      return c[0] * std::pow(u + v, c[1]);
    case Preset2D::product_power:
      return c[0] * std::pow(u, c[1]) * std::pow(v, c[2]);
  }
  return std::nan("");
}

double FuncSpec2D::checked(double u, double v) const {
  const double value = (*this)(u, v);
  if (!std::isfinite(value)) {
    throw DomainError("'" + source_ + "' is not finite at (u,v)=(" + format_number(u) + ", " +
                      format_number(v) + ")");
  }
  return value;
}

std::optional<double> FuncSpec2D::constant_value() const {
  if (family_ == Preset2D::constant) return params_[0];
  if (family_) return std::nullopt;
  const auto& root = ast_.root();
  if (root->kind == Kind::number) return root->value;
  if (root->kind == Kind::negate && root->children[0]->kind == Kind::number) return -root->children[0]->value;
  return std::nullopt;
}

FuncSpec1D parse_func_1d(std::string_view text) {
  if (text.empty()) throw ParseError("empty expression", 0);
  return FuncSpec1D::parse(text);
}

FuncSpec2D parse_func_2d(std::string_view text) {
  if (text.empty()) throw ParseError("empty expression", 0);
  return FuncSpec2D::parse(text);
}

// ---------------------------------------------------------------------------

MonotoneReport check_c1_monotone(const FuncSpec2D& f, double U, double V, int n) {
  if (!(U > 0.0) || !(V > 0.0)) throw UsageError("monotonicity box must have U, V > 0");
  if (n < 2) throw UsageError("monotonicity lattice needs at least 2 samples per axis");

  const auto count = static_cast<std::size_t>(n);
  std::vector<double> values(count * count);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return values[i * count + j]; };
  auto coord = [](double extent, std::size_t i, std::size_t n_) {
    return extent * static_cast<double>(i) / static_cast<double>(n_ - 1);
  };

  MonotoneReport report;
  report.samples_used = count * count;
  report.min_value = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = 0; j < count; ++j) {
      const double u = coord(U, i, count);
      const double v = coord(V, j, count);
      const double value = f(u, v);
      if (!std::isfinite(value)) {
        throw DomainError("'" + f.source_text() + "' is not finite at lattice point (u,v)=(" + format_number(u) +
                          ", " + format_number(v) + ")");
      }
      at(i, j) = value;
      report.min_value = std::min(report.min_value, value);
    }
  }

  auto consider = [&](double prev, double next, double u, double v, char axis) {
    const double drop = next - prev;
    const double tol = 1e-12 * std::max({1.0, std::abs(prev), std::abs(next)});
    if (drop < -tol) {
      (axis == 'u' ? report.is_nondecreasing_u : report.is_nondecreasing_v) = false;
      if (!report.worst_violation || drop < report.worst_violation->amount) {
        report.worst_violation = MonotoneViolation{drop, u, v, axis};
      }
    }
  };
  for (std::size_t i = 0; i + 1 < count; ++i) {
    for (std::size_t j = 0; j < count; ++j) {
      consider(at(i, j), at(i + 1, j), coord(U, i, count), coord(V, j, count), 'u');
    }
  }
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = 0; j + 1 < count; ++j) {
      consider(at(i, j), at(i, j + 1), coord(U, i, count), coord(V, j, count), 'v');
    }
  }
  return report;
}

}  // namespace khess
