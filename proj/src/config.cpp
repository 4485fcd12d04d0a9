#include "bjj/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace bjj {

namespace {

struct Value {
  enum class Kind { number, boolean, string, array } kind;
  double num = 0.0;
  bool b = false;
  std::string str;
  std::vector<Value> items;
};

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

// strips a # comment that is not inside a quoted string
std::string strip_comment(const std::string& line) {
  bool in_str = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_str = !in_str;
    if (line[i] == '#' && !in_str) return line.substr(0, i);
  }
  return line;
}

Value parse_value(const std::string& raw, const std::string& path) {
  const std::string s = trim(raw);
  if (s.empty()) throw ConfigError("empty value for " + path);
  Value v;
  if (s == "true" || s == "false") {
    v.kind = Value::Kind::boolean;
    v.b = s == "true";
    return v;
  }
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"')
      throw ConfigError("unterminated string for " + path);
    v.kind = Value::Kind::string;
    v.str = s.substr(1, s.size() - 2);
    return v;
  }
  if (s.front() == '[') {
    if (s.back() != ']') throw ConfigError("unterminated array for " + path);
    v.kind = Value::Kind::array;
    std::string inner = s.substr(1, s.size() - 2);
    std::string cur;
    bool in_str = false;
    auto flush = [&]() {
      const std::string t = trim(cur);
      if (!t.empty()) v.items.push_back(parse_value(t, path));
      cur.clear();
    };
    for (char c : inner) {
      if (c == '"') in_str = !in_str;
      if (c == ',' && !in_str) {
        flush();
        continue;
      }
      cur += c;
    }
    flush();
    return v;
  }
  char* end = nullptr;
  v.num = std::strtod(s.c_str(), &end);
  if (end == nullptr || *end != '\0' || !std::isfinite(v.num))
    throw ConfigError("malformed value for " + path + ": '" + s + "'");
  v.kind = Value::Kind::number;
  return v;
}

double as_number(const Value& v, const std::string& path) {
  if (v.kind != Value::Kind::number)
    throw ConfigError(path + ": expected a number");
  return v.num;
}

std::size_t as_count(const Value& v, const std::string& path) {
  const double d = as_number(v, path);
  if (d < 0 || d != std::floor(d))
    throw ConfigError(path + ": expected a non-negative integer");
  return static_cast<std::size_t>(d);
}

bool as_bool(const Value& v, const std::string& path) {
  if (v.kind != Value::Kind::boolean)
    throw ConfigError(path + ": expected true/false");
  return v.b;
}

std::string as_string(const Value& v, const std::string& path) {
  if (v.kind != Value::Kind::string)
    throw ConfigError(path + ": expected a quoted string");
  return v.str;
}

std::vector<double> as_number_list(const Value& v, const std::string& path) {
  if (v.kind != Value::Kind::array)
    throw ConfigError(path + ": expected an array");
  std::vector<double> out;
  for (const auto& item : v.items) out.push_back(as_number(item, path));
  return out;
}

std::vector<std::string> as_string_list(const Value& v, const std::string& path) {
  if (v.kind != Value::Kind::array)
    throw ConfigError(path + ": expected an array");
  std::vector<std::string> out;
  for (const auto& item : v.items) out.push_back(as_string(item, path));
  return out;
}

std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  RunConfig c;
  std::istringstream is(text);
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "model" && section != "control" && section != "optimize" &&
          section != "sweep" && section != "output")
        throw ConfigError("unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (section.empty())
      throw ConfigError("key '" + key + "' outside any section");
    const std::string path = section + "." + key;
    const Value v = parse_value(line.substr(eq + 1), path);

    if (section == "model") {
      if (key == "tier") c.tier = tier_from_string(as_string(v, path));
      else if (key == "J") c.j = as_number(v, path);
      else if (key == "dU") c.du = as_number(v, path);
      else if (key == "N") c.n_bosons = as_count(v, path);
      else if (key == "dt") c.dt = as_number(v, path);
      else if (key == "a") c.a = as_number(v, path);
      else if (key == "x_min") c.x_min = as_number(v, path);
      else if (key == "x_max") c.x_max = as_number(v, path);
      else if (key == "n_points") c.n_points = as_count(v, path);
      else if (key == "snapshot_stride") c.snapshot_stride = as_count(v, path);
      else if (key == "gpe_D_prep") c.gpe_d_prep = as_number(v, path);
      else if (key == "dimer_D_prep_J") c.dimer_d_prep_j = as_number(v, path);
      else throw ConfigError("unknown key: " + path);
    } else if (section == "control") {
      if (key == "strategy") c.strategy = strategy_from_string(as_string(v, path));
      else if (key == "ccp_form") {
        const std::string f = as_string(v, path);
        if (f == "paper-cos2") c.ccp_form = CcpForm::paper_cos2;
        else if (f == "hamiltonian-cos") c.ccp_form = CcpForm::hamiltonian_cos;
        else throw ConfigError(path + ": unknown form '" + f + "'");
      }
      else if (key == "crab_modes") c.crab_modes = as_count(v, path);
      else if (key == "D_max_J") c.d_max_j = as_number(v, path);
      else if (key == "D0_J") c.d0_j = as_number(v, path);
      else if (key == "DT_J") c.dT_j = as_number(v, path);
      else throw ConfigError("unknown key: " + path);
    } else if (section == "optimize") {
      if (key == "max_evals") c.max_evals = as_count(v, path);
      else if (key == "n_restarts") c.n_restarts = as_count(v, path);
      else if (key == "simplex_scale") c.simplex_scale = as_number(v, path);
      else if (key == "target_cost") c.target_cost = as_number(v, path);
      else if (key == "spread_tol") c.spread_tol = as_number(v, path);
      else if (key == "seed") c.seed = static_cast<std::uint64_t>(as_count(v, path));
      else if (key == "penalty_weight") c.penalty_weight = as_number(v, path);
      else throw ConfigError("unknown key: " + path);
    } else if (section == "sweep") {
      if (key == "strategies") c.strategies = as_string_list(v, path);
      else if (key == "interactions") c.interactions = as_number_list(v, path);
      else if (key == "T_values") c.t_values = as_number_list(v, path);
      else if (key == "seeds") {
        c.seeds.clear();
        for (double d : as_number_list(v, path)) {
          if (d < 0 || d != std::floor(d))
            throw ConfigError(path + ": seeds must be non-negative integers");
          c.seeds.push_back(static_cast<std::uint64_t>(d));
        }
      }
      else if (key == "threshold") c.threshold = as_number(v, path);
      else if (key == "fit") c.fit = as_bool(v, path);
      else if (key == "tqsl") c.tqsl = as_bool(v, path);
      else if (key == "fit_t_min") c.fit_t_min = as_number(v, path);
      else if (key == "fit_t_max") c.fit_t_max = as_number(v, path);
      else if (key == "jobs") c.jobs = as_count(v, path);
      else throw ConfigError("unknown key: " + path);
    } else if (section == "output") {
      if (key == "dir") c.out_dir = as_string(v, path);
      else if (key == "csv") c.csv_name = as_string(v, path);
      else if (key == "summary") c.summary_name = as_string(v, path);
      else if (key == "series") c.series = as_bool(v, path);
      else if (key == "snapshots") c.snapshots = as_bool(v, path);
      else throw ConfigError("unknown key: " + path);
    }
  }
  // structural validation (the sweep spec re-validates at run time)
  for (const auto& s : c.strategies) strategy_from_string(s);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

std::string serialize_config(const RunConfig& c) {
  std::string o;
  o += "[model]\n";
  o += "tier = \"" + to_string(c.tier) + "\"\n";
  o += "J = " + fmt_num(c.j) + "\n";
  o += "dU = " + fmt_num(c.du) + "\n";
  o += "N = " + std::to_string(c.n_bosons) + "\n";
  o += "dt = " + fmt_num(c.dt) + "\n";
  o += "a = " + fmt_num(c.a) + "\n";
  o += "x_min = " + fmt_num(c.x_min) + "\n";
  o += "x_max = " + fmt_num(c.x_max) + "\n";
  o += "n_points = " + std::to_string(c.n_points) + "\n";
  o += "snapshot_stride = " + std::to_string(c.snapshot_stride) + "\n";
  o += "gpe_D_prep = " + fmt_num(c.gpe_d_prep) + "\n";
  o += "dimer_D_prep_J = " + fmt_num(c.dimer_d_prep_j) + "\n";
  o += "\n[control]\n";
  o += "strategy = \"" + to_string(c.strategy) + "\"\n";
  o += std::string("ccp_form = \"") +
       (c.ccp_form == CcpForm::paper_cos2 ? "paper-cos2" : "hamiltonian-cos") +
       "\"\n";
  o += "crab_modes = " + std::to_string(c.crab_modes) + "\n";
  o += "D_max_J = " + fmt_num(c.d_max_j) + "\n";
  o += "D0_J = " + fmt_num(c.d0_j) + "\n";
  o += "DT_J = " + fmt_num(c.dT_j) + "\n";
  o += "\n[optimize]\n";
  o += "max_evals = " + std::to_string(c.max_evals) + "\n";
  o += "n_restarts = " + std::to_string(c.n_restarts) + "\n";
  o += "simplex_scale = " + fmt_num(c.simplex_scale) + "\n";
  o += "target_cost = " + fmt_num(c.target_cost) + "\n";
  o += "spread_tol = " + fmt_num(c.spread_tol) + "\n";
  o += "seed = " + std::to_string(c.seed) + "\n";
  o += "penalty_weight = " + fmt_num(c.penalty_weight) + "\n";
  o += "\n[sweep]\n";
  o += "strategies = [";
  for (std::size_t i = 0; i < c.strategies.size(); ++i)
    o += (i ? ", " : "") + ("\"" + c.strategies[i] + "\"");
  o += "]\n";
  o += "interactions = [";
  for (std::size_t i = 0; i < c.interactions.size(); ++i)
    o += (i ? ", " : "") + fmt_num(c.interactions[i]);
  o += "]\n";
  o += "T_values = [";
  for (std::size_t i = 0; i < c.t_values.size(); ++i)
    o += (i ? ", " : "") + fmt_num(c.t_values[i]);
  o += "]\n";
  o += "seeds = [";
  for (std::size_t i = 0; i < c.seeds.size(); ++i)
    o += (i ? ", " : "") + std::to_string(c.seeds[i]);
  o += "]\n";
  o += "threshold = " + fmt_num(c.threshold) + "\n";
  o += std::string("fit = ") + (c.fit ? "true" : "false") + "\n";
  o += std::string("tqsl = ") + (c.tqsl ? "true" : "false") + "\n";
  o += "fit_t_min = " + fmt_num(c.fit_t_min) + "\n";
  o += "fit_t_max = " + fmt_num(c.fit_t_max) + "\n";
  o += "jobs = " + std::to_string(c.jobs) + "\n";
  o += "\n[output]\n";
  o += "dir = \"" + c.out_dir + "\"\n";
  o += "csv = \"" + c.csv_name + "\"\n";
  o += "summary = \"" + c.summary_name + "\"\n";
  o += std::string("series = ") + (c.series ? "true" : "false") + "\n";
  o += std::string("snapshots = ") + (c.snapshots ? "true" : "false") + "\n";
  return o;
}

std::uint64_t config_hash(const RunConfig& c) {
  const std::string s = serialize_config(c);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

void apply_env_seed(RunConfig& c) {
  if (const char* env = std::getenv("BJJ_QSL_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == nullptr || *end != '\0')
      throw ConfigError("BJJ_QSL_SEED: not an integer: " + std::string(env));
    c.seed = static_cast<std::uint64_t>(v);
  }
}

SweepSpec to_sweep_spec(const RunConfig& c) {
  SweepSpec s;
  s.tier = c.tier;
  s.strategies.clear();
  for (const auto& name : c.strategies)
    s.strategies.push_back(strategy_from_string(name));
  s.interactions = c.interactions;
  s.t_values = c.t_values;
  s.seeds = c.seeds;
  s.tqsl_threshold = c.threshold;
  s.do_fit = c.fit;
  s.do_tqsl = c.tqsl;
  s.fit_t_min = c.fit_t_min;
  s.fit_t_max = c.fit_t_max;
  s.jobs = c.jobs;

  s.num.j = c.j;
  s.num.du = c.du;
  s.num.n_bosons = c.n_bosons;
  s.num.dt = c.dt;
  s.num.well.a = c.a;
  if (c.tier == Tier::gpe) s.num.grid = Grid1D(c.x_min, c.x_max, c.n_points);
  s.num.gpe_d_prep = c.gpe_d_prep;
  s.num.dimer_d_prep_j = c.dimer_d_prep_j;
  s.num.ccp_form = c.ccp_form;
  s.num.snapshot_stride = c.snapshot_stride;

  s.opt.max_evals = c.max_evals;
  s.opt.n_restarts = c.n_restarts;
  s.opt.simplex_scale = c.simplex_scale;
  s.opt.target_cost = c.target_cost;
  s.opt.spread_tol = c.spread_tol;
  s.opt.seed = c.seed;
  s.opt.penalty_weight = c.penalty_weight;
  s.opt.jobs = c.jobs;

  s.crab.n_modes = c.crab_modes;
  s.crab.d_max_j = c.d_max_j;
  s.crab.d0_j = c.d0_j;
  s.crab.dT_j = c.dT_j;
  return s;
}

}  // namespace bjj
