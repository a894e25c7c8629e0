#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mqc/config.hpp"
#include "mqc/spectra.hpp"
#include "mqc/validation.hpp"

namespace fs = std::filesystem;
using namespace mqc;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "1.0.0";

enum Exit { ok = 0, failed = 1, config_error = 2, numerical_error = 3 };

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// RFC 4180: comma separated, CRLF line endings
class CsvWriter {
 public:
  explicit CsvWriter(const fs::path& path) : out_(path, std::ios::binary) {
    if (!out_) throw config::ConfigError("cannot write " + path.string());
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << "\r\n";
  }

 private:
  std::ofstream out_;
};

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw config::ConfigError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

json params_json(const liouville::PhysicalParams& p) {
  const double to_hz = 1.0 / (2.0 * kPi);
  return {{"gamma_rad_per_s", p.gamma},
          {"gamma_Hz", p.gamma * to_hz},
          {"omega0_rad_per_s", p.omega0},
          {"omega0_Hz", p.omega0 * to_hz},
          {"doppler_rms_rad_per_s", p.doppler_rms},
          {"doppler_rms_Hz", p.doppler_rms * to_hz},
          {"doppler_rms_over_gamma", p.doppler_over_gamma()},
          {"k0_per_m", p.k0},
          {"mean_distance_m", p.mean_distance},
          {"xi_bar", p.xi_bar}};
}

void log_params(const liouville::PhysicalParams& p) {
  const double to_hz = 1.0 / (2.0 * kPi);
  std::fprintf(stderr, "gamma       = %.6e rad/s = %.6e Hz\n", p.gamma, p.gamma * to_hz);
  std::fprintf(stderr, "omega0      = %.6e rad/s = %.6e Hz\n", p.omega0, p.omega0 * to_hz);
  std::fprintf(stderr, "Doppler rms = %.6e rad/s = %.6e Hz (%.6f gamma)\n", p.doppler_rms,
               p.doppler_rms * to_hz, p.doppler_over_gamma());
  std::fprintf(stderr, "xi_bar      = %.6f (r_bar = %.6e m)\n", p.xi_bar, p.mean_distance);
  for (const auto& w : p.warnings()) std::fprintf(stderr, "warning: %s\n", w.c_str());
}

json sidecar(const config::RunConfig& cfg, const liouville::PhysicalParams& p,
             const std::string& command) {
  return {{"command", command},
          {"version", kVersion},
          {"config", cfg.to_json()},
          {"derived", params_json(p)},
          {"warnings", p.warnings()}};
}

json orientation_residual(const config::RunConfig& cfg, const liouville::PhysicalParams& p) {
  double change = 0.0;
  spectra::averaged_tensor_moments(cfg.tensor, p.xi_bar, cfg.polar_order, cfg.azimuthal_order,
                                   &change);
  return {{"orientation_doubling_relative_change", change},
          {"orientation_orders", {cfg.polar_order, cfg.azimuthal_order}},
          {"doppler_average", "closed form (Faddeeva function), no quadrature"}};
}

fs::path output_dir(const config::RunConfig& cfg) {
  fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw config::ConfigError("cannot create output directory " + dir.string());
  return dir;
}

// -- commands ----------------------------------------------------------------------

int cmd_spectrum(const config::RunConfig& cfg) {
  const auto p = cfg.physical();
  log_params(p);
  const fs::path dir = output_dir(cfg);
  for (const auto& spec : cfg.signals()) {
    const auto grid = cfg.detuning_grid(spec.kappa, p);
    const auto result =
        spectra::spectrum(spec, cfg.theta_pi * kPi, p, grid, cfg.spectrum_options());
    const std::string stem = "spectrum_" + spec.label();
    CsvWriter csv(dir / (stem + ".csv"));
    csv.row({"detuning_over_gamma", "re", "im"});
    for (std::size_t i = 0; i < grid.size(); ++i)
      csv.row({num(grid[i]), num(result.values[i].real()), num(result.values[i].imag())});
    json meta = sidecar(cfg, p, "spectrum");
    meta["signal"] = spec.label();
    meta["units"] = "f^2/gamma^2";
    meta["quadrature"] = orientation_residual(cfg, p);
    write_json(dir / (stem + ".json"), meta);
    std::fprintf(stderr, "wrote %s\n", (dir / (stem + ".csv")).c_str());
  }
  return ok;
}

std::vector<double> theta_grid(const config::RunConfig& cfg) {
  std::vector<double> t(cfg.theta_steps);
  for (int i = 0; i < cfg.theta_steps; ++i)
    t[i] = kPi * (cfg.theta_min_pi + (cfg.theta_max_pi - cfg.theta_min_pi) * i / (cfg.theta_steps - 1));
  return t;
}

int cmd_peakscan(const config::RunConfig& cfg) {
  const auto p = cfg.physical();
  log_params(p);
  const fs::path dir = output_dir(cfg);
  const auto thetas = theta_grid(cfg);
  const auto scan = spectra::peak_scan(thetas, p, cfg.spectrum_options(), spectra::scan_signals(),
                                       cfg.jobs);
  std::vector<std::string> header{"theta_over_pi"};
  for (const auto& s : scan.signals) header.push_back(s.label());
  std::vector<std::vector<double>> norm;
  if (cfg.normalized_columns)
    for (const auto& s : scan.signals) {
      header.push_back(s.label() + "_normalized");
      norm.push_back(spectra::normalized(scan.values[norm.size()]));
    }
  CsvWriter csv(dir / "peakscan.csv");
  csv.row(header);
  for (std::size_t t = 0; t < thetas.size(); ++t) {
    std::vector<std::string> row{num(thetas[t] / kPi)};
    for (const auto& col : scan.values) row.push_back(num(col[t]));
    for (const auto& col : norm) row.push_back(num(col[t]));
    csv.row(row);
  }
  json meta = sidecar(cfg, p, "peakscan");
  meta["units"] = "f^2/(sqrt(2 pi) gamma^2)";
  meta["quadrature"] = orientation_residual(cfg, p);
  write_json(dir / "peakscan.json", meta);
  std::fprintf(stderr, "wrote %s\n", (dir / "peakscan.csv").c_str());
  return ok;
}

int cmd_harmonics(const config::RunConfig& cfg) {
  const auto p = cfg.physical();
  log_params(p);
  const fs::path dir = output_dir(cfg);
  const auto opts = cfg.spectrum_options();
  CsvWriter csv(dir / "harmonics.csv");
  csv.row({"signal", "n", "A_n", "residual"});
  json residuals;
  for (const auto& spec : spectra::scan_signals()) {
    std::map<double, double> cache;
    auto raw = [&](double theta) {
      auto it = cache.find(theta);
      if (it != cache.end()) return it->second;
      const double v = spectra::peak_amplitude(spec, theta, p, opts);
      cache.emplace(theta, v);
      return v;
    };
    // normalize to max |P| = 1 on the projection grid (which contains pi/2)
    const int samples = 8 * std::max(cfg.harmonics_n_max, 8);
    double scale = 0.0;
    for (int j = 0; j < samples; ++j) scale = std::max(scale, std::abs(raw(4.0 * kPi * j / samples)));
    if (scale == 0.0) scale = 1.0;
    const auto h = spectra::harmonic_coefficients([&](double t) { return raw(t) / scale; },
                                                  cfg.harmonics_n_max, samples);
    for (int n = 0; n <= cfg.harmonics_n_max; ++n)
      csv.row({spec.label(), std::to_string(n), num(h.coefficients[n]), num(h.residual)});
    residuals[spec.label()] = h.residual;
  }
  json meta = sidecar(cfg, p, "harmonics");
  meta["normalization"] = "max |P| = 1, sign kept";
  meta["reconstruction_residuals"] = residuals;
  meta["quadrature"] = orientation_residual(cfg, p);
  write_json(dir / "harmonics.json", meta);
  std::fprintf(stderr, "wrote %s\n", (dir / "harmonics.csv").c_str());
  return ok;
}

int cmd_oracle(const config::RunConfig& cfg) {
  const auto p = cfg.physical();
  log_params(p);
  const fs::path dir = output_dir(cfg);
  std::vector<double> grid;
  if (cfg.detuning_min_over_gamma) {
    grid = cfg.detuning_grid(1, p);
  } else {
    for (int i = 0; i <= 200; ++i) grid.push_back(-10.0 + 0.1 * i);
  }
  const double theta = cfg.theta_pi * kPi;
  const auto channel = scattering::ChannelConfig::preset(cfg.channel, cfg.k_hat, theta);
  const double d1 = cfg.oracle_delta1_over_gamma;
  const auto time = spectra::time_domain_oracle(channel, d1, grid);
  spectra::SpectrumOptions single = cfg.spectrum_options();
  single.include_double = false;
  single.include_single = true;
  const auto laplace = spectra::single_config_spectrum(
      d1, 0.0, p.xi_bar, Vec3::UnitZ(), {1, cfg.channel, cfg.k_hat}, theta, grid, single);
  CsvWriter csv(dir / "oracle.csv");
  csv.row({"detuning_over_gamma", "re", "im", "laplace_re", "laplace_im"});
  double dev = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    csv.row({num(grid[i]), num(time.values[i].real()), num(time.values[i].imag()),
             num(laplace.values[i].real()), num(laplace.values[i].imag())});
    dev = std::max(dev, std::abs(time.values[i] - laplace.values[i]));
    scale = std::max(scale, std::abs(laplace.values[i]));
  }
  json meta = sidecar(cfg, p, "oracle");
  meta["max_relative_deviation"] = scale > 0.0 ? dev / scale : dev;
  const spectra::OracleOptions o;
  meta["time_grid"] = {{"fluorescence_horizon_over_inv_gamma", o.fluorescence_horizon},
                       {"delay_horizon_over_inv_gamma", o.delay_horizon},
                       {"step_over_inv_gamma", o.step}};
  write_json(dir / "oracle.json", meta);
  std::fprintf(stderr, "oracle vs Laplace: max relative deviation %.3e\n",
               scale > 0.0 ? dev / scale : dev);
  return ok;
}

int cmd_validate(const config::RunConfig& cfg, const std::optional<std::string>& tolerance_file) {
  validation::Tolerances tol;
  if (tolerance_file) {
    std::ifstream in(*tolerance_file);
    if (!in) throw config::ConfigError("cannot open tolerance file " + *tolerance_file);
    const auto bad = validation::tolerance_mismatches(config::parse_key_values(in, *tolerance_file), tol);
    if (!bad.empty()) {
      for (const auto& k : bad)
        std::fprintf(stderr, "tolerance file differs from the pinned value: %s\n", k.c_str());
      return failed;
    }
  }
  const auto p = cfg.physical();
  log_params(p);
  const fs::path dir = output_dir(cfg);
  const auto report = validation::run_acceptance(
      p, tol, cfg.jobs, [](const validation::CriterionResult& r) {
        std::printf("criterion %2d %-42s %s\n", r.id, r.name.c_str(), r.passed ? "PASS" : "FAIL");
        std::fflush(stdout);
      });
  json out = report.to_json();
  out["version"] = kVersion;
  out["config"] = cfg.to_json();
  out["derived"] = params_json(p);
  out["tolerances"] = tol.as_map();
  write_json(dir / "validation.json", out);
  std::printf("%s\n", report.all_passed() ? "all criteria passed" : "some criteria failed");
  return report.all_passed() ? ok : failed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiple-quantum coherence spectra of dipole-coupled atom pairs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::optional<std::string> config_path, out_dir, channel, khat, tensor, scattering, kappa,
      tolerances;
  std::optional<double> theta_pi, theta_min, theta_max;
  std::optional<int> jobs, steps, n_max;
  bool normalized = false;

  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--kappa", kappa, "coherence order(s): 1, 2 or 1,2");
  app.add_option("--channel", channel, "polarization channel: par or perp");
  app.add_option("--khat", khat, "detection direction: x or y");
  app.add_option("--theta-pi", theta_pi, "pulse area in units of pi");
  app.add_option("--tensor", tensor, "coupling tensor: far or full");
  app.add_option("--jobs", jobs, "worker threads");
  app.add_option("--scattering", scattering, "all, single or double scattering");
  app.fallthrough();

  auto* spectrum = app.add_subcommand("spectrum", "demodulated spectrum on a detuning grid");
  auto* peakscan = app.add_subcommand("peakscan", "peak amplitudes against pulse area");
  peakscan->add_option("--theta-min-pi", theta_min, "scan start in units of pi");
  peakscan->add_option("--theta-max-pi", theta_max, "scan end in units of pi");
  peakscan->add_option("--steps", steps, "number of scan points (>= 2)");
  peakscan->add_flag("--normalized", normalized, "add columns normalized to max |P| = 1");
  auto* harmonics = app.add_subcommand("harmonics", "cosine-series amplitudes of the peak curves");
  harmonics->add_option("--n-max", n_max, "highest harmonic");
  auto* oracle = app.add_subcommand("oracle", "time-domain check of the single-scattering spectrum");
  auto* validate = app.add_subcommand("validate", "run the acceptance suite");
  validate->add_option("--tolerances", tolerances, "tolerance file to compare with the pinned values");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : config_error;
  }

  if (std::getenv("MQC_SIM_SEED"))
    std::fprintf(stderr, "note: MQC_SIM_SEED is reserved and has no effect; all quadrature is deterministic\n");

  try {
    config::RunConfig cfg = config_path ? config::load_config(*config_path) : config::RunConfig::defaults();
    if (out_dir) cfg.output_dir = *out_dir;
    if (kappa) cfg.kappa = config::parse_kappa_list(*kappa);
    if (channel) cfg.channel = config::parse_channel(*channel);
    if (khat) cfg.k_hat = config::parse_khat(*khat);
    if (theta_pi) cfg.theta_pi = *theta_pi;
    if (tensor) cfg.tensor = config::parse_tensor(*tensor);
    if (jobs) cfg.jobs = *jobs;
    if (scattering) cfg.scattering = config::parse_scattering(*scattering);
    if (theta_min) cfg.theta_min_pi = *theta_min;
    if (theta_max) cfg.theta_max_pi = *theta_max;
    if (steps) cfg.theta_steps = *steps;
    if (normalized) cfg.normalized_columns = true;
    if (n_max) cfg.harmonics_n_max = *n_max;
    cfg.validate();

    if (spectrum->parsed()) return cmd_spectrum(cfg);
    if (peakscan->parsed()) return cmd_peakscan(cfg);
    if (harmonics->parsed()) return cmd_harmonics(cfg);
    if (oracle->parsed()) return cmd_oracle(cfg);
    if (validate->parsed()) return cmd_validate(cfg, tolerances);
  } catch (const config::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return config_error;
  } catch (const ConvergenceError& e) {
    std::fprintf(stderr, "numerical error (convergence guard): %s\n", e.what());
    return numerical_error;
  } catch (const SingularResolventError& e) {
    std::fprintf(stderr, "numerical error (resolvent guard): %s\n", e.what());
    return numerical_error;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return config_error;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return config_error;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return numerical_error;
  }
  return config_error;
}
