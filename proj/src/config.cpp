#include "rlab/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace rlab::config {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

Config Config::parse_text(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(lineno) + ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    cfg.sections_[section][key] = value;
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_text(ss.str());
}

bool Config::has(const std::string& section, const std::string& key) const {
  auto s = sections_.find(section);
  return s != sections_.end() && s->second.count(key) > 0;
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
  auto s = sections_.find(section);
  if (s == sections_.end()) return fallback;
  auto k = s->second.find(key);
  return k == s->second.end() ? fallback : k->second;
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
  if (!has(section, key)) return fallback;
  const std::string& v = sections_.at(section).at(key);
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (trim(v.substr(pos)).empty()) return d;
  } catch (...) {
  }
  throw ConfigError("[" + section + "] " + key + ": not a number: '" + v + "'");
}

int Config::get_int(const std::string& section, const std::string& key, int fallback) const {
  double d = get_double(section, key, fallback);
  if (d != std::floor(d))
    throw ConfigError("[" + section + "] " + key + ": expected an integer");
  return static_cast<int>(d);
}

std::optional<double> Config::get_optional_double(const std::string& section,
                                                  const std::string& key) const {
  if (!has(section, key)) return std::nullopt;
  return get_double(section, key, 0.0);
}

std::vector<double> Config::get_list(const std::string& section,
                                     const std::string& key) const {
  std::vector<double> out;
  if (!has(section, key)) return out;
  std::istringstream in(sections_.at(section).at(key));
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (...) {
      throw ConfigError("[" + section + "] " + key + ": bad list item '" + item + "'");
    }
  }
  return out;
}

Coefficients coefficients_from(const Config& cfg) {
  auto expr_of = [&](const std::string& key) {
    return expr::Expression::parse(cfg.get_string("problem", key, ""));
  };
  double a = cfg.get_double("problem", "a", 0.0);

  std::string family = cfg.get_string("problem", "family", "");
  if (!family.empty()) {
    FamilySpec spec;
    spec.family = family;
    if (!cfg.has("problem", "p")) throw ConfigError("[problem] family needs p");
    spec.p = expr_of("p");
    if (cfg.has("problem", "P")) spec.P = expr_of("P");
    if (cfg.has("problem", "pi")) spec.pi = expr_of("pi");
    if (cfg.has("problem", "phi")) spec.phi = expr_of("phi");
    if (cfg.has("problem", "phi_prime")) spec.phi_prime = expr_of("phi_prime");
    spec.k = cfg.get_double("problem", "k", 1.0);
    spec.lambda = cfg.get_double("problem", "lambda", 2.0);
    spec.mu = cfg.get_double("problem", "mu", 0.0);
    spec.a = a;
    return make_family(spec);
  }

  if (!cfg.has("problem", "p") || !cfg.has("problem", "q"))
    throw ConfigError("[problem] needs either family=... or inline p and q");
  auto t_start = cfg.get_optional_double("problem", "t_start");
  return make_coefficients(expr_of("p"), expr_of("q"), {}, a, t_start);
}

pipeline::Settings settings_from(const Config& cfg) {
  pipeline::Settings s;
  auto& tail = s.classify.tail;
  tail.r_conv = cfg.get_double("quad", "r_conv", tail.r_conv);
  tail.conv_windows = cfg.get_int("quad", "conv_windows", tail.conv_windows);
  tail.div_windows = cfg.get_int("quad", "div_windows", tail.div_windows);
  tail.divergence_threshold =
      cfg.get_double("quad", "divergence_threshold", tail.divergence_threshold);
  tail.tail_tol = cfg.get_double("quad", "tail_tol", 1e-3);
  tail.panel_rel_tol = cfg.get_double("quad", "panel_tol", tail.panel_rel_tol);

  s.classify.horizon_scale = cfg.get_double("quad", "horizon_scale", 1e6);
  s.classify.p_probe_horizon = cfg.get_double("quad", "p_probe_horizon", 1e6);
  s.classify.horizon_override = cfg.get_optional_double("quad", "horizon");
  s.classify.probe_window_scale = cfg.get_double("classify", "probe_window_scale", 10.0);
  s.classify.probe_points =
      static_cast<std::size_t>(cfg.get_int("classify", "probe_points", 513));
  s.classify.applicability_margin = cfg.get_double("classify", "margin", 0.05);

  s.picard.nodes = static_cast<std::size_t>(cfg.get_int("riccati", "nodes", 512));
  s.picard.tol = cfg.get_double("riccati", "tol", 1e-9);
  s.picard.max_iter = cfg.get_int("riccati", "max_iter", 200);
  s.picard.threshold_margin = cfg.get_double("riccati", "threshold_margin", 0.9);
  s.picard.band_headroom = cfg.get_double("classify", "margin", 0.05);

  s.verify_band = cfg.get_double("verify", "band", 0.02);
  s.oracle_tol = cfg.get_double("verify", "oracle_tol", 1e-4);
  s.window_factor = cfg.get_double("verify", "window_factor", 2.0);
  s.case3_omega = cfg.get_double("solve", "omega", 1.0);
  return s;
}

SweepGrid sweep_grid_from(const Config& cfg) {
  SweepGrid g;
  g.k = cfg.get_list("sweep", "k");
  g.lambda = cfg.get_list("sweep", "lambda");
  g.mu = cfg.get_list("sweep", "mu");
  if (g.k.empty() || g.lambda.empty() || g.mu.empty())
    throw ConfigError("[sweep] needs nonempty k, lambda and mu lists");
  return g;
}

}  // namespace rlab::config
