#pragma once

#include <map>
#include <string>
#include <vector>

#include "ks/radial.hpp"

#include "json.hpp"

namespace ks {

// Fully deterministic run configuration (flat key=value file, CLI overrides).
struct RunConfig {
  int dim = 3;
  double r0 = 0.05;
  double r_max = 30.0;
  double tol_ode = 1e-13;
  double tol_match = 1e-8;
  double tol_picard = 1e-9;
  double scan_periods = 0;  // 0 = derived from n_profiles
  int n_profiles = 3;
  std::string out_dir = ".";

  void validate() const;
  nlohmann::json echo() const;
};

RunConfig load_config_file(const std::string& path);

// %.17g formatting so reruns are byte-identical.
std::string format_double(double v);

// Atomic write (temp file + rename); "-" writes to stdout.
void write_text(const std::string& path, const std::string& content);

std::string profile_csv(const RadialProfile& p);

struct MuTableRow {
  int n;
  double mu_n, eps_n, ratio, value_gap, deriv_mismatch;
};
std::string mu_table_csv(const std::vector<MuTableRow>& rows);

}  // namespace ks
