#ifndef SLIPINV_CONFIG_HPP
#define SLIPINV_CONFIG_HPP

#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "slipinv/hyperopt.hpp"
#include "slipinv/posterior.hpp"
#include "slipinv/prior.hpp"
#include "slipinv/sampler.hpp"

namespace slipinv {

/// Flat `section.key = value` configuration. Also accepts a run_manifest.json
/// (detected by a leading '{'), whose "config" object holds the same keys, so
/// any previous run can be reproduced from its manifest.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return from_string(buf.str(), path);
  }

  static KeyValueConfig from_string(const std::string& text, const std::string& where = "config") {
    KeyValueConfig cfg;
    const std::size_t first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
      auto manifest = nlohmann::json::parse(text);
      if (!manifest.contains("config"))
        throw std::runtime_error(where + ": manifest JSON lacks a \"config\" object");
      for (auto& [k, v] : manifest.at("config").items())
        cfg.values_[k] = v.get<std::string>();
      return cfg;
    }

    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const std::size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos) {
        if (line.find_first_not_of(" \t\r") != std::string::npos)
          throw std::runtime_error(where + ":" + std::to_string(lineno) +
                                   ": expected 'key = value'");
        continue;
      }
      auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
      };
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty())
        throw std::runtime_error(where + ":" + std::to_string(lineno) + ": empty key");
      cfg.values_[key] = value;
    }
    return cfg;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw std::runtime_error("config: missing required key '" + key + "'");
    used_.insert(key);
    return it->second;
  }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    used_.insert(key);
    return it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    return parse_double(key, get_string(key));
  }

  double get_double(const std::string& key) const { return parse_double(key, get_string(key)); }

  long long get_int(const std::string& key, long long fallback) const {
    if (!has(key)) return fallback;
    const std::string s = get_string(key);
    try {
      std::size_t pos = 0;
      long long v = std::stoll(s, &pos);
      if (pos != s.size()) throw std::invalid_argument("trailing junk");
      return v;
    } catch (const std::exception&) {
      throw std::runtime_error("config: key '" + key + "' has non-integer value '" + s + "'");
    }
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const std::string s = get_string(key);
    try {
      std::size_t pos = 0;
      std::uint64_t v = std::stoull(s, &pos);
      if (pos != s.size()) throw std::invalid_argument("trailing junk");
      return v;
    } catch (const std::exception&) {
      throw std::runtime_error("config: key '" + key + "' has non-integer value '" + s + "'");
    }
  }

  bool get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string s = get_string(key);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw std::runtime_error("config: key '" + key + "' has non-boolean value '" + s + "'");
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  /// Keys present in the file but never consumed; used to reject typos.
  std::vector<std::string> unused_keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_)
      if (!used_.count(k)) out.push_back(k);
    return out;
  }

  const std::map<std::string, std::string>& raw() const { return values_; }

 private:
  double parse_double(const std::string& key, const std::string& s) const {
    try {
      std::size_t pos = 0;
      double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument("trailing junk");
      return v;
    } catch (const std::exception&) {
      throw std::runtime_error("config: key '" + key + "' has non-numeric value '" + s + "'");
    }
  }

  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

/// `name=lo:hi:step` inclusive range; a single value is also accepted.
inline std::vector<double> parse_range_spec(const std::string& spec, const std::string& what) {
  std::vector<double> parts;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ':')) {
    try {
      parts.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw std::runtime_error(what + ": bad range token '" + tok + "' in '" + spec + "'");
    }
  }
  if (parts.size() == 1) return parts;
  if (parts.size() != 3) throw std::runtime_error(what + ": expected lo:hi:step, got '" + spec + "'");
  const double lo = parts[0], hi = parts[1], step = parts[2];
  if (!(step > 0.0) || hi < lo) throw std::runtime_error(what + ": invalid range '" + spec + "'");
  std::vector<double> out;
  for (double v = lo; v <= hi + 1e-9 * step; v += step) out.push_back(v);
  return out;
}

/// `lambda_s=lo:hi:step,lambda_d=lo:hi:step` -> cross-product grid, meters.
inline std::vector<std::pair<double, double>> parse_grid_spec(const std::string& spec) {
  if (spec.empty()) throw std::runtime_error("grid spec: empty");
  std::vector<double> ls, ld;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const std::size_t eq = part.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("grid spec: expected name=lo:hi:step in '" + part + "'");
    const std::string name = part.substr(0, eq);
    const std::vector<double> range = parse_range_spec(part.substr(eq + 1), "grid spec " + name);
    if (name == "lambda_s")
      ls = range;
    else if (name == "lambda_d")
      ld = range;
    else
      throw std::runtime_error("grid spec: unknown axis '" + name + "'");
  }
  if (ls.empty() || ld.empty())
    throw std::runtime_error("grid spec: both lambda_s and lambda_d ranges are required");
  std::vector<std::pair<double, double>> grid;
  for (double a : ls)
    for (double b : ld) grid.emplace_back(a, b);
  return grid;
}

/// Everything a subcommand run needs, resolved from config plus CLI flags.
struct RunConfig {
  KeyValueConfig kv;

  // paths
  std::string mesh_path, stations_path, greens_path, observations_path, draws_path;
  std::string point_estimate_path;
  std::string out_dir = ".";

  PriorSpec prior;
  MaternParams matern;
  LikelihoodSpec likelihood;
  SamplerConfig sampler;
  HyperPriors hyper_priors;
  HyperOptOptions hyperopt_options;
  std::string hyperopt_mode = "sigma_beta";  // or "both"
  double hyperopt_sigma_sq = 1.0;

  std::string dic_grid_spec;
  bool dic_per_cell_seeds = false;

  bool use_synthetic_kernel = false;
  double kernel_decay_m = 60000.0;
  Eigen::Index pin_subfault = 0;
  std::string pin_component = "dip";
  double pin_value_m = 0.3;
  Eigen::Vector3d sim_noise_sigmas{0.0021, 0.0025, 0.0051};  // zero allowed

  double rigidity_pa = 32e9;
  double slip_floor_m = 0.01;

  bool emit_svg = true;
  std::string draws_format = "csv";
  unsigned threads = 1;

  static RunConfig from_config(const KeyValueConfig& kv) {
    RunConfig rc;
    rc.kv = kv;
    rc.mesh_path = rc.kv.get_string("paths.mesh", "");
    rc.stations_path = rc.kv.get_string("paths.stations", "");
    rc.greens_path = rc.kv.get_string("paths.greens", "");
    rc.observations_path = rc.kv.get_string("paths.observations", "");
    rc.draws_path = rc.kv.get_string("paths.draws", "");
    rc.point_estimate_path = rc.kv.get_string("paths.point_estimate", "");

    rc.prior.beta_s = rc.kv.get_double("prior.beta_s", rc.prior.beta_s);
    rc.prior.beta_d = rc.kv.get_double("prior.beta_d", rc.prior.beta_d);
    rc.prior.z_lim = rc.kv.get_double("prior.z_lim_m", rc.prior.z_lim);
    rc.prior.bound_s_lo = rc.kv.get_double("prior.bound_s_lower_m", rc.prior.bound_s_lo);
    rc.prior.bound_s_hi = rc.kv.get_double("prior.bound_s_upper_m", rc.prior.bound_s_hi);
    rc.prior.bound_d_lo = rc.kv.get_double("prior.bound_d_lower_m", rc.prior.bound_d_lo);
    rc.prior.bound_d_hi = rc.kv.get_double("prior.bound_d_upper_m", rc.prior.bound_d_hi);
    rc.prior.sigma_beta_sq = rc.kv.get_double("prior.sigma_beta_sq", rc.prior.sigma_beta_sq);
    rc.prior.validate();

    rc.matern.lambda_s = rc.kv.get_double("matern.lambda_s_m", rc.matern.lambda_s);
    rc.matern.lambda_d = rc.kv.get_double("matern.lambda_d_m", rc.matern.lambda_d);
    rc.matern.gamma_sq = rc.kv.get_double("matern.gamma_sq", rc.matern.gamma_sq);
    rc.matern.validate();

    rc.likelihood.axis_sigmas[0] = rc.kv.get_double("likelihood.sigma_x_m", 0.0021);
    rc.likelihood.axis_sigmas[1] = rc.kv.get_double("likelihood.sigma_y_m", 0.0025);
    rc.likelihood.axis_sigmas[2] = rc.kv.get_double("likelihood.sigma_z_m", 0.0051);
    rc.likelihood.validate();

    rc.sampler.sample_count = rc.kv.get_int("sampler.sample_count", rc.sampler.sample_count);
    rc.sampler.burn_in = rc.kv.get_int("sampler.burn_in", rc.sampler.burn_in);
    rc.sampler.thin = rc.kv.get_int("sampler.thin", rc.sampler.thin);
    rc.sampler.seed = rc.kv.get_u64("sampler.seed", rc.sampler.seed);
    rc.sampler.mixing_probability =
        rc.kv.get_double("sampler.mixing_probability", rc.sampler.mixing_probability);
    rc.sampler.beta_shape_a = rc.kv.get_double("sampler.beta_shape_a", rc.sampler.beta_shape_a);
    rc.sampler.beta_shape_b = rc.kv.get_double("sampler.beta_shape_b", rc.sampler.beta_shape_b);
    rc.sampler.validate();

    rc.hyper_priors.a = rc.kv.get_double("hyper.a", 1.0);
    rc.hyper_priors.b = rc.kv.get_double("hyper.b", 1.0);
    rc.hyper_priors.a_beta = rc.kv.get_double("hyper.a_beta", 1.0);
    rc.hyper_priors.b_beta = rc.kv.get_double("hyper.b_beta", 1.0);
    rc.hyper_priors.validate();

    rc.hyperopt_options.grid_points =
        static_cast<int>(rc.kv.get_int("hyperopt.grid_points", rc.hyperopt_options.grid_points));
    rc.hyperopt_options.bracket_lo =
        rc.kv.get_double("hyperopt.bracket_lo", rc.hyperopt_options.bracket_lo);
    rc.hyperopt_options.bracket_hi =
        rc.kv.get_double("hyperopt.bracket_hi", rc.hyperopt_options.bracket_hi);
    rc.hyperopt_mode = rc.kv.get_string("hyperopt.mode", rc.hyperopt_mode);
    if (rc.hyperopt_mode != "sigma_beta" && rc.hyperopt_mode != "both")
      throw std::runtime_error("config: hyperopt.mode must be 'sigma_beta' or 'both'");
    rc.hyperopt_sigma_sq = rc.kv.get_double("hyperopt.sigma_sq", rc.hyperopt_sigma_sq);

    rc.dic_grid_spec = rc.kv.get_string("dic.grid", "");
    rc.dic_per_cell_seeds = rc.kv.get_bool("dic.per_cell_seeds", false);

    rc.use_synthetic_kernel = rc.kv.get_bool("sim.use_synthetic_kernel", false);
    rc.kernel_decay_m = rc.kv.get_double("sim.kernel_decay_m", rc.kernel_decay_m);
    rc.pin_subfault = rc.kv.get_int("sim.pin_subfault", 0);
    rc.pin_component = rc.kv.get_string("sim.pin_component", rc.pin_component);
    if (rc.pin_component != "strike" && rc.pin_component != "dip")
      throw std::runtime_error("config: sim.pin_component must be 'strike' or 'dip'");
    rc.pin_value_m = rc.kv.get_double("sim.pin_value_m", rc.pin_value_m);
    rc.sim_noise_sigmas[0] =
        rc.kv.get_double("sim.noise_sigma_x_m", rc.likelihood.axis_sigmas[0]);
    rc.sim_noise_sigmas[1] =
        rc.kv.get_double("sim.noise_sigma_y_m", rc.likelihood.axis_sigmas[1]);
    rc.sim_noise_sigmas[2] =
        rc.kv.get_double("sim.noise_sigma_z_m", rc.likelihood.axis_sigmas[2]);
    if (!(rc.sim_noise_sigmas.array() >= 0.0).all())
      throw std::runtime_error("config: sim.noise_sigma_* must be non-negative");

    rc.rigidity_pa = rc.kv.get_double("mw.rigidity_pa", rc.rigidity_pa);
    rc.slip_floor_m = rc.kv.get_double("mw.slip_floor_m", rc.slip_floor_m);

    rc.emit_svg = rc.kv.get_bool("output.emit_svg", true);
    rc.draws_format = rc.kv.get_string("output.draws_format", rc.draws_format);
    if (rc.draws_format != "csv" && rc.draws_format != "f64")
      throw std::runtime_error("config: output.draws_format must be 'csv' or 'f64'");

    const auto unused = rc.kv.unused_keys();
    if (!unused.empty())
      throw std::runtime_error("config: unknown key '" + unused.front() + "'");
    return rc;
  }
};

}  // namespace slipinv

#endif
