#include "khess/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "khess/error.hpp"

namespace khess {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& section, const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !std::isfinite(v)) {
    throw UsageError("[" + section + "] " + key + ": expected a finite number, got '" + text + "'");
  }
  return v;
}

int to_int(const std::string& section, const std::string& key, const std::string& text) {
  const double v = to_double(section, key, text);
  if (v != std::floor(v) || std::abs(v) > 1e9) {
    throw UsageError("[" + section + "] " + key + ": expected an integer, got '" + text + "'");
  }
  return static_cast<int>(v);
}

bool to_bool(const std::string& section, const std::string& key, std::string text) {
  std::transform(text.begin(), text.end(), text.begin(), [](unsigned char c) { return std::tolower(c); });
  if (text == "true" || text == "yes" || text == "1" || text == "on") return true;
  if (text == "false" || text == "no" || text == "0" || text == "off") return false;
  throw UsageError("[" + section + "] " + key + ": expected a boolean, got '" + text + "'");
}

void reject_unknown(const std::string& section, const std::map<std::string, std::string>& entries,
                    const std::set<std::string>& known) {
  for (const auto& [key, value] : entries) {
    if (!known.count(key)) throw UsageError("unknown key '" + key + "' in [" + section + "]");
  }
}

// Parameter names of the preset families, in positional order.
std::vector<std::string> preset_parameter_names(const std::string& family) {
  if (family == "constant") return {"c"};
  if (family == "power" || family == "decay") return {"c", "alpha"};
  if (family == "exponential") return {"c", "beta"};
  if (family == "sum_power") return {"c", "gamma"};
  if (family == "product_power") return {"c", "alpha", "beta"};
  return {};
}

std::string& function_slot(ProblemBlock& block, const std::string& name) {
  if (name == "b1") return block.b1;
  if (name == "b2") return block.b2;
  if (name == "p1") return block.p1;
  if (name == "p2") return block.p2;
  if (name == "f1") return block.f1;
  if (name == "f2") return block.f2;
  throw UsageError("sweep parameter refers to unknown function '" + name + "'");
}

std::string with_preset_parameter(const std::string& text, const std::string& name, double value) {
  const std::string body = trim(text);
  const std::string prefix = "preset:";
  const auto open = body.find('(');
  const auto close = body.rfind(')');
  if (body.rfind(prefix, 0) != 0 || open == std::string::npos || close == std::string::npos || close < open) {
    throw UsageError("sweep over '" + name + "' needs a preset function, got '" + text + "'");
  }
  const std::string family = trim(body.substr(prefix.size(), open - prefix.size()));
  const auto names = preset_parameter_names(family);
  auto args = split_list(body.substr(open + 1, close - open - 1));
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) {
    throw UsageError("preset family '" + family + "' has no parameter '" + name + "'");
  }
  const auto index = static_cast<std::size_t>(it - names.begin());
  if (args.size() != names.size()) throw UsageError("preset '" + body + "' has the wrong number of parameters");
  args[index] = fmt17(value);
  std::string out = prefix + family + "(";
  for (std::size_t i = 0; i < args.size(); ++i) out += (i ? ", " : "") + args[i];
  return out + ")";
}

}  // namespace

bool OutputBlock::wants(const std::string& format) const {
  return std::find(formats.begin(), formats.end(), format) != formats.end();
}

IniDocument parse_ini(const std::string& text) {
  IniDocument doc;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = "config line " + std::to_string(line_no);
    std::string s = trim(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw UsageError(where + ": unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section.empty()) throw UsageError(where + ": empty section name");
      doc[section];
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw UsageError(where + ": expected 'key = value'");
    if (section.empty()) throw UsageError(where + ": key outside of any section");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) throw UsageError(where + ": empty key");
    auto& entries = doc[section];
    if (entries.count(key)) throw UsageError(where + ": duplicate key '" + key + "' in [" + section + "]");
    entries.emplace(key, value);
  }
  return doc;
}

RunConfig parse_run_config(const std::string& text) {
  const IniDocument doc = parse_ini(text);
  for (const auto& [name, entries] : doc) {
    if (name != "problem" && name != "numeric" && name != "output" && name != "sweep") {
      throw UsageError("unknown config section [" + name + "]");
    }
  }
  RunConfig cfg;

  const auto problem_it = doc.find("problem");
  if (problem_it == doc.end()) throw UsageError("config has no [problem] section");
  const auto& pr = problem_it->second;
  static const std::set<std::string> problem_keys{"N", "k1", "k2", "a1", "a2", "b1", "b2", "p1", "p2", "f1", "f2"};
  reject_unknown("problem", pr, problem_keys);
  for (const auto& key : problem_keys) {
    if (!pr.count(key)) throw UsageError("[problem] is missing the required key '" + key + "'");
  }
  auto& p = cfg.problem;
  p.N = to_int("problem", "N", pr.at("N"));
  p.k1 = to_int("problem", "k1", pr.at("k1"));
  p.k2 = to_int("problem", "k2", pr.at("k2"));
  p.a1 = to_double("problem", "a1", pr.at("a1"));
  p.a2 = to_double("problem", "a2", pr.at("a2"));
  p.b1 = pr.at("b1");
  p.b2 = pr.at("b2");
  p.p1 = pr.at("p1");
  p.p2 = pr.at("p2");
  p.f1 = pr.at("f1");
  p.f2 = pr.at("f2");

  if (auto it = doc.find("numeric"); it != doc.end()) {
    const auto& e = it->second;
    reject_unknown("numeric", e,
                   {"R", "nodes", "tol", "max_iter", "s_max", "R_max", "grid", "ratio", "blow_up", "gauss_points"});
    auto& n = cfg.numeric;
    if (e.count("R")) n.R = to_double("numeric", "R", e.at("R"));
    if (e.count("nodes")) n.nodes = to_int("numeric", "nodes", e.at("nodes"));
    if (e.count("tol")) n.tol = to_double("numeric", "tol", e.at("tol"));
    if (e.count("max_iter")) n.max_iter = to_int("numeric", "max_iter", e.at("max_iter"));
    if (e.count("s_max")) n.s_max = to_double("numeric", "s_max", e.at("s_max"));
    if (e.count("R_max")) n.R_max = to_double("numeric", "R_max", e.at("R_max"));
    if (e.count("grid")) n.grid = e.at("grid");
    if (e.count("ratio")) n.ratio = to_double("numeric", "ratio", e.at("ratio"));
    if (e.count("blow_up")) n.blow_up = to_double("numeric", "blow_up", e.at("blow_up"));
    if (e.count("gauss_points")) n.gauss_points = to_int("numeric", "gauss_points", e.at("gauss_points"));
    if (n.grid != "uniform" && n.grid != "geometric") {
      throw UsageError("[numeric] grid must be 'uniform' or 'geometric', got '" + n.grid + "'");
    }
  }

  if (auto it = doc.find("output"); it != doc.end()) {
    const auto& e = it->second;
    reject_unknown("output", e, {"directory", "formats", "emit_plot_data"});
    auto& o = cfg.output;
    if (e.count("directory")) o.directory = e.at("directory");
    if (e.count("formats")) {
      o.formats = split_list(e.at("formats"));
      for (const auto& f : o.formats) {
        if (f != "csv" && f != "json") throw UsageError("[output] formats accepts csv and json, got '" + f + "'");
      }
    }
    if (e.count("emit_plot_data")) o.emit_plot_data = to_bool("output", "emit_plot_data", e.at("emit_plot_data"));
  }

  if (auto it = doc.find("sweep"); it != doc.end()) {
    const auto& e = it->second;
    reject_unknown("sweep", e, {"parameter", "values", "parallelism"});
    SweepSpec sw;
    if (!e.count("parameter") || !e.count("values")) throw UsageError("[sweep] needs 'parameter' and 'values'");
    sw.parameter = e.at("parameter");
    for (const auto& v : split_list(e.at("values"))) sw.values.push_back(to_double("sweep", "values", v));
    if (sw.values.empty()) throw UsageError("[sweep] values must be a nonempty list");
    if (e.count("parallelism")) sw.parallelism = to_int("sweep", "parallelism", e.at("parallelism"));
    if (sw.parallelism < 1) throw UsageError("[sweep] parallelism must be at least 1");
    cfg.sweep = std::move(sw);
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str());
}

ProblemSpec to_problem_spec(const ProblemBlock& block) {
  ProblemSpec spec;
  spec.N = block.N;
  spec.k1 = block.k1;
  spec.k2 = block.k2;
  spec.a1 = block.a1;
  spec.a2 = block.a2;
  spec.b1 = parse_func_1d(block.b1);
  spec.b2 = parse_func_1d(block.b2);
  spec.p1 = parse_func_1d(block.p1);
  spec.p2 = parse_func_1d(block.p2);
  spec.f1 = parse_func_2d(block.f1);
  spec.f2 = parse_func_2d(block.f2);
  return spec;
}

RadialGrid make_grid(const NumericBlock& numeric) {
  if (!(numeric.R > 0.0)) throw UsageError("[numeric] R must be positive");
  if (numeric.nodes < 3) throw UsageError("[numeric] nodes must be at least 3");
  const auto n = static_cast<std::size_t>(numeric.nodes);
  if (numeric.grid == "geometric") return RadialGrid::geometric(numeric.R, n, numeric.ratio);
  return RadialGrid::uniform(numeric.R, n);
}

SolverOptions solver_options(const NumericBlock& numeric) {
  SolverOptions o;
  o.tol = numeric.tol;
  o.max_iter = numeric.max_iter;
  o.blow_up_ceiling = numeric.blow_up;
  o.gauss_points = numeric.gauss_points;
  return o;
}

LimitPolicy limit_policy(const NumericBlock& numeric) {
  LimitPolicy policy;
  policy.R_max = numeric.R_max;
  return policy;
}

RunConfig apply_sweep_value(const RunConfig& config, const std::string& parameter, double value) {
  RunConfig out = config;
  auto& p = out.problem;
  auto integral = [&](const char* name) {
    if (value != std::floor(value)) throw UsageError(std::string("sweep value for ") + name + " must be an integer");
    return static_cast<int>(value);
  };
  if (parameter == "a1") {
    p.a1 = value;
  } else if (parameter == "a2") {
    p.a2 = value;
  } else if (parameter == "N") {
    p.N = integral("N");
  } else if (parameter == "k1") {
    p.k1 = integral("k1");
  } else if (parameter == "k2") {
    p.k2 = integral("k2");
  } else if (parameter == "R") {
    out.numeric.R = value;
  } else if (const auto dot = parameter.find('.'); dot != std::string::npos) {
    std::string& slot = function_slot(p, parameter.substr(0, dot));
    slot = with_preset_parameter(slot, parameter.substr(dot + 1), value);
  } else {
    throw UsageError("unknown sweep parameter '" + parameter + "'");
  }
  return out;
}

}  // namespace khess
