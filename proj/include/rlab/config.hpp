#pragma once

// Flat key-value configuration with one section per module:
//
//   [problem]   p, q, a, t_start              (inline coefficients)
//               family, P, pi, phi, phi_prime, k, lambda, mu
//   [quad]      horizon_scale, p_probe_horizon, horizon, panel_tol, r_conv,
//               conv_windows, div_windows, divergence_threshold, tail_tol
//   [classify]  probe_window_scale, probe_points, margin
//   [riccati]   nodes, tol, max_iter, threshold_margin
//   [solve]     kind (auto or an operator name), omega, band_param
//   [verify]    band, oracle_tol, window_factor
//   [sweep]     k, lambda, mu  (comma-separated lists)
//   [output]    format (json | csv | table)
//
// Lines are `key = value`; `#` and `;` start comments.  All defaults are
// listed by `riccati-lab --help`.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rlab/coefficients.hpp"
#include "rlab/pipeline.hpp"

namespace rlab::config {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_text(const std::string& text);

  bool has(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key,
                    double fallback) const;
  int get_int(const std::string& section, const std::string& key, int fallback) const;
  std::optional<double> get_optional_double(const std::string& section,
                                            const std::string& key) const;
  std::vector<double> get_list(const std::string& section, const std::string& key) const;

  const std::map<std::string, std::map<std::string, std::string>>& sections() const {
    return sections_;
  }

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

// [problem] section -> coefficients (family or inline expressions).
Coefficients coefficients_from(const Config& cfg);

// All numeric knobs -> pipeline settings.
pipeline::Settings settings_from(const Config& cfg);

struct SweepGrid {
  std::vector<double> k, lambda, mu;
};
SweepGrid sweep_grid_from(const Config& cfg);

}  // namespace rlab::config
