#include "mqc/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace mqc::config {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(v))
    throw ConfigError(key + ": expected a finite number, got '" + text + "'");
  return v;
}

int to_int(const std::string& key, const std::string& text) {
  const double v = to_double(key, text);
  if (v != std::floor(v) || std::abs(v) > 1e9)
    throw ConfigError(key + ": expected an integer, got '" + text + "'");
  return static_cast<int>(v);
}

bool to_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"temperature_K", [](RunConfig& c, auto& k, auto& v) { c.temperature_K = to_double(k, v); }},
      {"mass_kg", [](RunConfig& c, auto& k, auto& v) { c.mass_kg = to_double(k, v); }},
      {"wavelength_m", [](RunConfig& c, auto& k, auto& v) { c.wavelength_m = to_double(k, v); }},
      {"gamma_rad_per_s",
       [](RunConfig& c, auto& k, auto& v) { c.gamma_rad_per_s = to_double(k, v); }},
      {"mean_distance_m",
       [](RunConfig& c, auto& k, auto& v) { c.mean_distance_m = to_double(k, v); }},
      {"density_per_m3",
       [](RunConfig& c, auto& k, auto& v) { c.density_per_m3 = to_double(k, v); }},
      {"doppler_rms_rad_per_s",
       [](RunConfig& c, auto& k, auto& v) { c.doppler_rms_rad_per_s = to_double(k, v); }},
      {"theta_pi", [](RunConfig& c, auto& k, auto& v) { c.theta_pi = to_double(k, v); }},
      {"channel", [](RunConfig& c, auto&, auto& v) { c.channel = parse_channel(v); }},
      {"khat", [](RunConfig& c, auto&, auto& v) { c.k_hat = parse_khat(v); }},
      {"kappa", [](RunConfig& c, auto&, auto& v) { c.kappa = parse_kappa_list(v); }},
      {"tensor", [](RunConfig& c, auto&, auto& v) { c.tensor = parse_tensor(v); }},
      {"scattering", [](RunConfig& c, auto&, auto& v) { c.scattering = parse_scattering(v); }},
      {"polar_order", [](RunConfig& c, auto& k, auto& v) { c.polar_order = to_int(k, v); }},
      {"azimuthal_order",
       [](RunConfig& c, auto& k, auto& v) { c.azimuthal_order = to_int(k, v); }},
      {"detuning_points",
       [](RunConfig& c, auto& k, auto& v) { c.detuning_points = to_int(k, v); }},
      {"detuning_min_over_gamma",
       [](RunConfig& c, auto& k, auto& v) { c.detuning_min_over_gamma = to_double(k, v); }},
      {"detuning_max_over_gamma",
       [](RunConfig& c, auto& k, auto& v) { c.detuning_max_over_gamma = to_double(k, v); }},
      {"theta_min_pi", [](RunConfig& c, auto& k, auto& v) { c.theta_min_pi = to_double(k, v); }},
      {"theta_max_pi", [](RunConfig& c, auto& k, auto& v) { c.theta_max_pi = to_double(k, v); }},
      {"theta_steps", [](RunConfig& c, auto& k, auto& v) { c.theta_steps = to_int(k, v); }},
      {"normalized_columns",
       [](RunConfig& c, auto& k, auto& v) { c.normalized_columns = to_bool(k, v); }},
      {"harmonics_n_max",
       [](RunConfig& c, auto& k, auto& v) { c.harmonics_n_max = to_int(k, v); }},
      {"oracle_delta1_over_gamma",
       [](RunConfig& c, auto& k, auto& v) { c.oracle_delta1_over_gamma = to_double(k, v); }},
      {"output_dir", [](RunConfig& c, auto&, auto& v) { c.output_dir = v; }},
      {"jobs", [](RunConfig& c, auto& k, auto& v) { c.jobs = to_int(k, v); }},
  };
  return table;
}

const char* channel_name(spectra::Polarization p) {
  return p == spectra::Polarization::parallel ? "par" : "perp";
}

const char* scattering_name(Scattering s) {
  switch (s) {
    case Scattering::single: return "single";
    case Scattering::double_: return "double";
    default: return "all";
  }
}

}  // namespace

spectra::Polarization parse_channel(const std::string& text) {
  if (text == "par") return spectra::Polarization::parallel;
  if (text == "perp") return spectra::Polarization::perpendicular;
  throw ConfigError("channel must be par or perp, got '" + text + "'");
}

Vec3 parse_khat(const std::string& text) {
  if (text == "x") return Vec3::UnitX();
  if (text == "y") return Vec3::UnitY();
  throw ConfigError("khat must be x or y, got '" + text + "'");
}

liouville::TensorMode parse_tensor(const std::string& text) {
  if (text == "far") return liouville::TensorMode::far_field;
  if (text == "full") return liouville::TensorMode::full;
  throw ConfigError("tensor must be far or full, got '" + text + "'");
}

Scattering parse_scattering(const std::string& text) {
  if (text == "all") return Scattering::all;
  if (text == "single") return Scattering::single;
  if (text == "double") return Scattering::double_;
  throw ConfigError("scattering must be all, single or double, got '" + text + "'");
}

std::vector<int> parse_kappa_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item == "1" || item == "2") {
      const int k = item[0] - '0';
      if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
    } else {
      throw ConfigError("kappa entries must be 1 or 2, got '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("kappa list is empty");
  return out;
}

RunConfig RunConfig::defaults() {
  RunConfig c;
  c.mean_distance_m = 80.0 * c.wavelength_m / (2.0 * kPi);
  return c;
}

void RunConfig::validate() const {
  if (mean_distance_m.has_value() == density_per_m3.has_value())
    throw ConfigError("give exactly one of mean_distance_m and density_per_m3");
  if (polar_order < 1 || azimuthal_order < 1)
    throw ConfigError("quadrature orders must be positive");
  if (detuning_points < 2)
    throw ConfigError("detuning grid is empty: detuning_points must be at least 2");
  if (detuning_min_over_gamma.has_value() != detuning_max_over_gamma.has_value())
    throw ConfigError("give both detuning_min_over_gamma and detuning_max_over_gamma or neither");
  if (detuning_min_over_gamma && !(*detuning_min_over_gamma < *detuning_max_over_gamma))
    throw ConfigError("detuning grid is empty: detuning_min_over_gamma >= detuning_max_over_gamma");
  if (theta_steps < 2) throw ConfigError("theta_steps must be at least 2");
  if (!(theta_min_pi < theta_max_pi)) throw ConfigError("theta_min_pi must be below theta_max_pi");
  if (theta_pi < 0.0) throw ConfigError("theta_pi must be nonnegative");
  if (harmonics_n_max < 0) throw ConfigError("harmonics_n_max must be nonnegative");
  if (jobs < 1) throw ConfigError("jobs must be at least 1");
  if (kappa.empty()) throw ConfigError("kappa list is empty");
  try {
    physical();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

liouville::PhysicalParams RunConfig::physical() const {
  const double r = mean_distance_m ? *mean_distance_m
                                   : liouville::mean_distance_from_density(density_per_m3.value());
  return liouville::PhysicalParams::from_inputs(temperature_K, mass_kg, wavelength_m,
                                                gamma_rad_per_s, r, doppler_rms_rad_per_s);
}

spectra::SpectrumOptions RunConfig::spectrum_options() const {
  spectra::SpectrumOptions o;
  o.mode = tensor;
  o.include_single = scattering != Scattering::double_;
  o.include_double = scattering != Scattering::single;
  o.polar_order = polar_order;
  o.azimuthal_order = azimuthal_order;
  return o;
}

std::vector<double> RunConfig::detuning_grid(int k, const liouville::PhysicalParams& params) const {
  if (!detuning_min_over_gamma) return spectra::default_detuning_grid(k, params, detuning_points);
  std::vector<double> grid(detuning_points);
  const double a = *detuning_min_over_gamma;
  const double b = *detuning_max_over_gamma;
  for (int i = 0; i < detuning_points; ++i) grid[i] = a + (b - a) * i / (detuning_points - 1);
  return grid;
}

std::vector<spectra::SignalSpec> RunConfig::signals() const {
  std::vector<spectra::SignalSpec> out;
  for (int k : kappa) out.push_back({k, channel, k_hat});
  return out;
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  j["temperature_K"] = temperature_K;
  j["mass_kg"] = mass_kg;
  j["wavelength_m"] = wavelength_m;
  j["gamma_rad_per_s"] = gamma_rad_per_s;
  j["gamma_Hz"] = gamma_rad_per_s / (2.0 * kPi);
  if (mean_distance_m) j["mean_distance_m"] = *mean_distance_m;
  if (density_per_m3) j["density_per_m3"] = *density_per_m3;
  if (doppler_rms_rad_per_s) j["doppler_rms_rad_per_s"] = *doppler_rms_rad_per_s;
  j["theta_pi"] = theta_pi;
  j["channel"] = channel_name(channel);
  j["khat"] = k_hat.isApprox(Vec3::UnitX()) ? "x" : "y";
  j["kappa"] = kappa;
  j["tensor"] = tensor == liouville::TensorMode::far_field ? "far" : "full";
  j["scattering"] = scattering_name(scattering);
  j["polar_order"] = polar_order;
  j["azimuthal_order"] = azimuthal_order;
  j["detuning_points"] = detuning_points;
  if (detuning_min_over_gamma) {
    j["detuning_min_over_gamma"] = *detuning_min_over_gamma;
    j["detuning_max_over_gamma"] = *detuning_max_over_gamma;
  }
  j["theta_min_pi"] = theta_min_pi;
  j["theta_max_pi"] = theta_max_pi;
  j["theta_steps"] = theta_steps;
  j["normalized_columns"] = normalized_columns;
  j["harmonics_n_max"] = harmonics_n_max;
  j["oracle_delta1_over_gamma"] = oracle_delta1_over_gamma;
  j["output_dir"] = output_dir;
  j["jobs"] = jobs;
  return j;
}

std::map<std::string, std::string> parse_key_values(std::istream& in, const std::string& origin) {
  std::map<std::string, std::string> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(number);
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw ConfigError(where + ": empty key or value");
    if (!out.emplace(key, value).second) throw ConfigError(where + ": duplicate key " + key);
  }
  return out;
}

RunConfig parse_config(std::istream& in, const std::string& origin) {
  RunConfig c = RunConfig::defaults();
  c.mean_distance_m.reset();
  for (const auto& [key, value] : parse_key_values(in, origin)) {
    auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(origin + ": unknown key " + key);
    it->second(c, key, value);
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return parse_config(in, path);
}

std::vector<std::string> known_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, v] : setters()) keys.push_back(k);
  return keys;
}

}  // namespace mqc::config
