#include "ks/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "ks/parallel.hpp"

namespace ks {

unsigned thread_cap() {
  const char* env = std::getenv("KS_SELFSIM_THREADS");
  unsigned cap = 0;
  if (env) cap = unsigned(std::strtoul(env, nullptr, 10));
  if (cap == 0) cap = std::max(1u, std::thread::hardware_concurrency());
  return cap;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const unsigned nt = std::min<std::size_t>(thread_cap(), n);
  if (nt <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errs(nt);
  for (unsigned t = 0; t < nt; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < n; i += nt) fn(i);
      } catch (...) {
        errs[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

void RunConfig::validate() const {
  if (dim < 3 || dim > 9) throw ParameterError("config: dim must be in [3,9]");
  if (!(tol_ode > 0 && tol_match > 0 && tol_picard > 0))
    throw ParameterError("config: tolerances must be positive");
  if (n_profiles < 1) throw ParameterError("config: n_profiles >= 1");
  if (!(0 < r0 && r0 < 1 && 1 < r_max)) throw ParameterError("config: need r0 < 1 < r_max");
}

nlohmann::json RunConfig::echo() const {
  return nlohmann::json{{"dim", dim},
                        {"r0", r0},
                        {"r_max", r_max},
                        {"tol_ode", tol_ode},
                        {"tol_match", tol_match},
                        {"tol_picard", tol_picard},
                        {"scan_periods", scan_periods},
                        {"n_profiles", n_profiles},
                        {"out_dir", out_dir}};
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("config: cannot open " + path);
  RunConfig cfg;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty()) continue;
    if (key == "dim")
      cfg.dim = std::stoi(val);
    else if (key == "r0")
      cfg.r0 = std::stod(val);
    else if (key == "r_max")
      cfg.r_max = std::stod(val);
    else if (key == "tol_ode")
      cfg.tol_ode = std::stod(val);
    else if (key == "tol_match")
      cfg.tol_match = std::stod(val);
    else if (key == "tol_picard")
      cfg.tol_picard = std::stod(val);
    else if (key == "scan_periods")
      cfg.scan_periods = std::stod(val);
    else if (key == "n_profiles")
      cfg.n_profiles = std::stoi(val);
    else if (key == "out_dir")
      cfg.out_dir = val;
    else
      throw ParameterError("config: unknown key '" + key + "'");
  }
  return cfg;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout << content;
    std::cout.flush();
    return;
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp);
    out << content;
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw Error("cannot rename to " + path);
}

std::string profile_csv(const RadialProfile& p) {
  std::ostringstream os;
  os << "r,value,deriv\n";
  for (std::size_t i = 0; i < p.grid.size(); ++i)
    os << format_double(p.grid.nodes[i]) << ',' << format_double(p.values[i]) << ','
       << format_double(p.derivs[i]) << '\n';
  return os.str();
}

std::string mu_table_csv(const std::vector<MuTableRow>& rows) {
  std::ostringstream os;
  os << "n,mu_n,eps_n,ratio,value_gap,deriv_mismatch\n";
  for (const auto& r : rows)
    os << r.n << ',' << format_double(r.mu_n) << ',' << format_double(r.eps_n) << ','
       << format_double(r.ratio) << ',' << format_double(r.value_gap) << ','
       << format_double(r.deriv_mismatch) << '\n';
  return os.str();
}

}  // namespace ks
