#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mqc/liouville.hpp"
#include "mqc/spectra.hpp"

/// Run configuration for the command-line driver. Files are flat `key = value`
/// lists; units are part of the key names and unknown keys are errors.
namespace mqc::config {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Scattering { all, single, double_ };

struct RunConfig {
  // physical parameters
  double temperature_K = 320.0;
  double mass_kg = 1.443e-25;
  double wavelength_m = 790e-9;
  double gamma_rad_per_s = 2.0 * kPi * 6.067e6;
  std::optional<double> mean_distance_m;
  std::optional<double> density_per_m3;
  std::optional<double> doppler_rms_rad_per_s;  ///< cross-check against Maxwell-Boltzmann

  // signal selection
  double theta_pi = 0.5;
  spectra::Polarization channel = spectra::Polarization::parallel;
  Vec3 k_hat = Vec3::UnitY();
  std::vector<int> kappa{1};
  liouville::TensorMode tensor = liouville::TensorMode::far_field;
  Scattering scattering = Scattering::all;
  int polar_order = 16;
  int azimuthal_order = 32;

  // grids
  int detuning_points = 801;
  std::optional<double> detuning_min_over_gamma;  ///< both or neither
  std::optional<double> detuning_max_over_gamma;
  double theta_min_pi = 0.0;
  double theta_max_pi = 4.0;
  int theta_steps = 401;
  bool normalized_columns = false;
  int harmonics_n_max = 12;
  double oracle_delta1_over_gamma = 0.0;

  std::string output_dir = ".";
  int jobs = 1;

  /// Paper parameter set with r_bar = 80 / k0.
  static RunConfig defaults();

  /// Throws ConfigError on inconsistent or out-of-range values.
  void validate() const;

  liouville::PhysicalParams physical() const;
  spectra::SpectrumOptions spectrum_options() const;
  /// Explicit [min, max] grid when given, otherwise the default grid for kappa.
  std::vector<double> detuning_grid(int kappa, const liouville::PhysicalParams& params) const;
  std::vector<spectra::SignalSpec> signals() const;

  nlohmann::json to_json() const;
};

/// `key = value` lines; `#` starts a comment. Duplicate keys are errors.
std::map<std::string, std::string> parse_key_values(std::istream& in, const std::string& origin);

/// Starts from defaults() with the distance cleared; the input must give exactly
/// one of mean_distance_m and density_per_m3.
RunConfig parse_config(std::istream& in, const std::string& origin = "<config>");
RunConfig load_config(const std::string& path);

std::vector<std::string> known_keys();

/// Helpers shared with the command-line flags.
spectra::Polarization parse_channel(const std::string& text);
Vec3 parse_khat(const std::string& text);
liouville::TensorMode parse_tensor(const std::string& text);
Scattering parse_scattering(const std::string& text);
std::vector<int> parse_kappa_list(const std::string& text);

}  // namespace mqc::config
