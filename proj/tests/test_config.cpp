#include <doctest.h>

#include <sstream>

#include "mqc/config.hpp"
#include "mqc/validation.hpp"

using namespace mqc;
using namespace mqc::config;

namespace {
RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, "test");
}
}  // namespace

TEST_SUITE("config") {
  TEST_CASE("defaults reproduce the paper parameter set") {
    const auto c = RunConfig::defaults();
    CHECK_NOTHROW(c.validate());
    const auto p = c.physical();
    CHECK(p.xi_bar == doctest::Approx(80.0).epsilon(1e-12));
    CHECK(p.doppler_over_gamma() == doctest::Approx(36.5075).epsilon(1e-5));
  }

  TEST_CASE("parsing") {
    const auto c = parse(
        "# comment\n"
        "temperature_K = 300   # trailing comment\n"
        "mean_distance_m = 2e-5\n"
        "channel = perp\n"
        "khat = x\n"
        "kappa = 2, 1\n"
        "tensor = full\n"
        "scattering = double\n"
        "\n"
        "detuning_min_over_gamma = -5\n"
        "detuning_max_over_gamma = 5\n"
        "detuning_points = 11\n");
    CHECK(c.temperature_K == 300.0);
    CHECK(c.channel == spectra::Polarization::perpendicular);
    CHECK(c.k_hat == Vec3::UnitX());
    CHECK(c.kappa == std::vector<int>{2, 1});
    CHECK(c.tensor == liouville::TensorMode::full);
    const auto opts = c.spectrum_options();
    CHECK_FALSE(opts.include_single);
    CHECK(opts.include_double);
    const auto grid = c.detuning_grid(1, c.physical());
    CHECK(grid.size() == 11);
    CHECK(grid.front() == -5.0);
    CHECK(grid[5] == doctest::Approx(0.0));
    CHECK(c.signals().size() == 2);
  }

  TEST_CASE("distance from density") {
    const auto c = parse("density_per_m3 = 1e18\n");
    CHECK(c.physical().mean_distance == doctest::Approx(0.554e-6));
  }

  TEST_CASE("invalid configurations") {
    CHECK_THROWS_AS(parse("temperature_K = 300\n"), ConfigError);  // no distance
    CHECK_THROWS_AS(parse("mean_distance_m = 1e-5\ndensity_per_m3 = 1e18\n"), ConfigError);
    CHECK_THROWS_AS(parse("mean_distance_m = 1e-5\ncolour = red\n"), ConfigError);
    CHECK_THROWS_AS(parse("mean_distance_m = 1e-5\nmean_distance_m = 2e-5\n"), ConfigError);
    CHECK_THROWS_AS(parse("mean_distance_m = 1e-5\ntemperature_K = warm\n"), ConfigError);
    CHECK_THROWS_AS(parse("mean_distance_m = 1e-5\ndetuning_points = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse("mean_distance_m = 1e-5\ndetuning_min_over_gamma = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse("mean_distance_m = 1e-5\ndetuning_min_over_gamma = 1\ndetuning_max_over_gamma = 1\n"),
                    ConfigError);
    CHECK_THROWS_AS(parse("mean_distance_m = 1e-5\nkappa = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse("mean_distance_m = 1e-5\nchannel = diagonal\n"), ConfigError);
    CHECK_THROWS_AS(parse("mean_distance_m = -1e-5\n"), ConfigError);
    CHECK_THROWS_AS(parse("mean_distance_m = 1e-5\ntheta_steps = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse("mean_distance_m = 1e-5\njust a line\n"), ConfigError);
    CHECK_THROWS_AS(parse("mean_distance_m = 1e-5\ndoppler_rms_rad_per_s = 1\n"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/file.cfg"), ConfigError);
  }

  TEST_CASE("json echo") {
    const auto j = RunConfig::defaults().to_json();
    CHECK(j.at("channel") == "par");
    CHECK(j.at("khat") == "y");
    CHECK(j.at("gamma_Hz").get<double>() == doctest::Approx(6.067e6));
    for (const auto& key : known_keys())
      if (key != "density_per_m3" && key != "doppler_rms_rad_per_s" && key.rfind("detuning_m", 0) != 0)
        CHECK_MESSAGE(j.contains(key), key);
  }

  TEST_CASE("pinned tolerances") {
    const validation::Tolerances tol;
    std::map<std::string, std::string> file;
    for (const auto& [k, v] : tol.as_map()) {
      std::ostringstream os;
      os.precision(17);
      os << v;
      file[k] = os.str();
    }
    CHECK(validation::tolerance_mismatches(file).empty());
    file["fwhm"] = "0.05";
    CHECK(validation::tolerance_mismatches(file) == std::vector<std::string>{"fwhm"});
    file.erase("fwhm");
    file["bogus"] = "1";
    CHECK(validation::tolerance_mismatches(file).size() == 1);
    CHECK(validation::tolerance_mismatches({{"oracle", "1e-4x"}}).size() == 1);
    CHECK(validation::tolerance_mismatches({{"oracle", "1e-4"}}).empty());
  }
}
