#include "symctrl/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace symctrl {

namespace {

using nlohmann::json;

double number(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    try {
      Expr e = parse_expression(j.get<std::string>(), 0, 0);
      return eval(e, Eigen::VectorXd(), Eigen::VectorXd());
    } catch (const std::exception& ex) {
      throw ConfigError(where + ": " + ex.what());
    }
  }
  throw ConfigError(where + ": expected a number");
}

const json& member(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key))
    throw ConfigError(where + ": missing \"" + key + "\"");
  return obj.at(key);
}

Box read_box(const json& j, std::size_t dim, const std::string& where) {
  if (!j.is_array() || j.size() != dim)
    throw ConfigError(where + ": expected " + std::to_string(dim) + " intervals");
  Box box;
  for (std::size_t i = 0; i < dim; ++i) {
    const json& iv = j[i];
    std::string w = where + "[" + std::to_string(i) + "]";
    if (!iv.is_array() || iv.size() != 2) throw ConfigError(w + ": expected [lo, hi]");
    box.push_back({number(iv[0], w), number(iv[1], w)});
  }
  return box;
}

StabilityCertificate read_certificate(const json& j, const std::string& where) {
  StabilityCertificate c;
  if (j.contains("beta_c")) c.beta_c = number(j["beta_c"], where + ".beta_c");
  if (j.contains("beta_lambda")) c.beta_lambda = number(j["beta_lambda"], where + ".beta_lambda");
  if (j.contains("gamma_a")) c.gamma_a = number(j["gamma_a"], where + ".gamma_a");
  if (j.contains("gamma_p")) c.gamma_p = number(j["gamma_p"], where + ".gamma_p");
  return c;
}

ControlSystem read_system(const json& j, const std::string& where, bool inputs_optional) {
  const auto n = member(j, "n", where).get<int>();
  if (n < 1) throw ConfigError(where + ".n must be positive");
  int m = 0;
  if (j.contains("m")) m = j["m"].get<int>();
  else if (!inputs_optional) throw ConfigError(where + ": missing \"m\"");
  if (m < 0) throw ConfigError(where + ".m must be nonnegative");

  Box state = read_box(member(j, "state_box", where), static_cast<std::size_t>(n), where + ".state_box");
  Box init = read_box(member(j, "init_box", where), static_cast<std::size_t>(n), where + ".init_box");
  Box input;
  if (m > 0) input = read_box(member(j, "input_box", where), static_cast<std::size_t>(m), where + ".input_box");

  const json& field = member(j, "field", where);
  if (!field.is_array() || field.size() != static_cast<std::size_t>(n))
    throw ConfigError(where + ".field: expected " + std::to_string(n) + " expressions");
  std::vector<Expr> exprs;
  for (std::size_t i = 0; i < field.size(); ++i) {
    std::string w = where + ".field[" + std::to_string(i) + "]";
    if (!field[i].is_string()) throw ConfigError(w + ": expected a string");
    try {
      exprs.push_back(parse_expression(field[i].get<std::string>(), n, m));
    } catch (const std::exception& ex) {
      throw ConfigError(w + ": " + ex.what());
    }
  }
  std::optional<StabilityCertificate> cert;
  if (j.contains("certificate")) cert = read_certificate(j["certificate"], where + ".certificate");
  try {
    return ControlSystem(std::move(state), std::move(init), std::move(input), std::move(exprs), cert);
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(where + ": " + ex.what());
  }
}

/* whitespace-separated tokens after the header keyword */
std::vector<std::string> tokens(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string t;
  while (ss >> t) out.push_back(t);
  return out;
}

double parse_real(const std::string& s) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw FormatError("bad number: " + s);
  return v;
}

std::uint32_t parse_index(const std::string& s) {
  std::uint32_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw FormatError("bad index: " + s);
  return v;
}

Box parse_box(const std::vector<std::string>& t) {
  if ((t.size() - 1) % 2 != 0) throw FormatError("box needs lo/hi pairs");
  Box box;
  for (std::size_t i = 1; i < t.size(); i += 2) box.push_back({parse_real(t[i]), parse_real(t[i + 1])});
  return box;
}

void write_box(std::ostream& out, const char* key, const Box& box) {
  out << key;
  for (const auto& iv : box) out << ' ' << format_real(iv.lo) << ' ' << format_real(iv.hi);
  out << '\n';
}

void write_indices(std::ostream& out, const char* key, const std::vector<std::uint32_t>& v) {
  out << key;
  for (auto i : v) out << ' ' << i;
  out << '\n';
}

}  // namespace

ProblemConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& ex) {
    throw ConfigError(std::string("config is not valid JSON: ") + ex.what());
  }
  try {
    ControlSystem plant = read_system(member(j, "plant", "config"), "plant", false);
    ControlSystem spec = read_system(member(j, "specification", "config"), "specification", true);
    if (plant.n() != spec.n())
      throw ConfigError("plant and specification must have the same n");

    const json& p = member(j, "params", "config");
    SynthesisParams params;
    params.epsilon = number(member(p, "epsilon", "params"), "params.epsilon");
    params.theta_p = number(member(p, "theta_p", "params"), "params.theta_p");
    params.theta_q = number(member(p, "theta_q", "params"), "params.theta_q");
    params.tau = number(member(p, "tau", "params"), "params.tau");
    params.eta = number(member(p, "eta", "params"), "params.eta");
    params.mu = number(member(p, "mu", "params"), "params.mu");
    if (p.contains("substeps")) params.substeps = p["substeps"].get<int>();
    try {
      validate_positive(params);
    } catch (const std::invalid_argument& ex) {
      throw ConfigError(ex.what());
    }

    SynthesisOptions options;
    if (j.contains("options")) {
      const json& o = j["options"];
      if (o.contains("override_validation")) options.override_validation = o["override_validation"].get<bool>();
      if (o.contains("transition_cap")) options.transition_cap = o["transition_cap"].get<std::uint64_t>();
      if (o.contains("frontier_order") && o["frontier_order"] != "fifo")
        throw ConfigError("options.frontier_order: only \"fifo\" is supported");
    }
    return ProblemConfig{std::move(plant), std::move(spec), params, options};
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("config: ") + ex.what());
  }
}

ProblemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_controller(std::ostream& out, const Controller& c) {
  out << "#dim " << c.states.dim() << '\n';
  out << "#eta " << format_real(c.states.eta()) << '\n';
  out << "#mu " << format_real(c.inputs.eta()) << '\n';
  write_box(out, "#state_box", c.states.box());
  write_box(out, "#input_box", c.inputs.box());
  write_indices(out, "#initials", c.initials);
  write_indices(out, "#bad", c.bad);
  for (const auto& t : c.transitions) out << t.source << ' ' << t.input << ' ' << t.target << '\n';
}

Controller read_controller(std::istream& in) {
  std::optional<std::size_t> dim;
  std::optional<double> eta, mu;
  std::optional<Box> state_box, input_box;
  Controller c;
  std::string line;
  std::size_t lineno = 0;
  bool body = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto t = tokens(line);
    if (t.empty()) continue;
    try {
      if (t[0][0] == '#') {
        if (body) throw FormatError("header after transitions");
        const std::string& key = t[0];
        if (key == "#dim") {
          if (t.size() != 2) throw FormatError("#dim takes one value");
          dim = parse_index(t[1]);
        } else if (key == "#eta") {
          if (t.size() != 2) throw FormatError("#eta takes one value");
          eta = parse_real(t[1]);
        } else if (key == "#mu") {
          if (t.size() != 2) throw FormatError("#mu takes one value");
          mu = parse_real(t[1]);
        } else if (key == "#state_box") {
          state_box = parse_box(t);
        } else if (key == "#input_box") {
          input_box = parse_box(t);
        } else if (key == "#initials") {
          for (std::size_t i = 1; i < t.size(); ++i) c.initials.push_back(parse_index(t[i]));
        } else if (key == "#bad") {
          for (std::size_t i = 1; i < t.size(); ++i) c.bad.push_back(parse_index(t[i]));
        } else {
          throw FormatError("unknown header " + key);
        }
      } else {
        body = true;
        if (t.size() != 3) throw FormatError("transition needs src input dst");
        c.transitions.push_back({parse_index(t[0]), parse_index(t[1]), parse_index(t[2])});
      }
    } catch (const FormatError& ex) {
      throw FormatError("controller line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  if (!dim || !eta || !mu || !state_box || !input_box)
    throw FormatError("controller file lacks a required header");
  if (state_box->size() != *dim) throw FormatError("#state_box does not match #dim");
  try {
    c.states = Lattice(*state_box, 2 * *eta);
    c.inputs = Lattice(*input_box, 2 * *mu);
  } catch (const std::exception& ex) {
    throw FormatError(std::string("controller lattice: ") + ex.what());
  }
  std::sort(c.transitions.begin(), c.transitions.end());
  std::sort(c.initials.begin(), c.initials.end());
  std::sort(c.bad.begin(), c.bad.end());
  for (const auto& tr : c.transitions)
    if (tr.source >= c.states.size() || tr.target >= c.states.size() || tr.input >= c.inputs.size())
      throw FormatError("transition index out of range");
  return c;
}

void save_controller(const std::string& path, const Controller& ctrl) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_controller(out, ctrl);
  if (!out) throw std::runtime_error("error writing " + path);
}

Controller load_controller(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read controller " + path);
  return read_controller(in);
}

void write_trace_csv(std::ostream& out, const ClosedLoopTrace& trace) {
  if (trace.states.empty()) return;
  const auto n = trace.states.front().size();
  const Eigen::Index m = trace.input_dim;
  out << "k";
  for (Eigen::Index i = 1; i <= n; ++i) out << ",x_" << i;
  for (Eigen::Index i = 1; i <= m; ++i) out << ",u_" << i;
  for (Eigen::Index i = 1; i <= n; ++i) out << ",s_" << i;
  out << ",deviation\n";
  for (std::size_t k = 0; k < trace.states.size(); ++k) {
    out << k;
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << format_real(trace.states[k][i]);
    for (Eigen::Index i = 0; i < m; ++i) {
      out << ',';
      if (k < trace.inputs.size()) out << format_real(trace.inputs[k][i]);
    }
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << format_real(trace.spec_states[k][i]);
    out << ',' << format_real(trace.deviations[k]) << '\n';
  }
}

std::string metrics_json(const Metrics& m) {
  nlohmann::ordered_json j;
  j["states"] = m.states;
  j["transitions"] = m.transitions;
  j["memory_units"] = m.memory_units;
  j["steps"] = m.steps;
  j["wall_time_ms"] = m.wall_time_ms;
  return j.dump();
}

}  // namespace symctrl
