#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "shocklab/models.hpp"

namespace shocklab::cli {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "shocklab 1.0.0";

struct InlineModel {
  std::string name = "inline";
  std::string form = "conservation";
  std::vector<double> flux;       // conservation: f(u) coefficients
  std::vector<double> p, q;       // general: h(u, ux) = P(u) + Q(u) ux
  std::vector<double> viscosity{1.0};
  std::vector<double> u_minus, u_plus;
};

struct V0Recipe {
  std::string kind = "dipole";  // dipole: A (x-c) e^{-(x-c)^2/(2w^2)}; gaussian: A e^{-(x-c)^2/w^2}
  double amplitude = 0.01;
  double center = -3.0;
  double width = 1.0;
};

struct ExperimentConfig {
  int schema = kSchemaVersion;
  std::string model = "burgers";
  std::optional<InlineModel> inline_model;
  double X = 20.0;
  int m = 801;
  double profile_tol = 1e-10;
  double cutoff_re = 0.1;
  // contour: boundary of {Re >= re_min, |lambda| <= radius} minus a disk of radius hole about 0
  double contour_re_min = 0.05;
  double contour_radius = 10.0;
  double contour_hole = 0.0;
  int contour_samples = 256;
  double origin_radius = 0.1;
  // manifold; NaN entries resolve from the spectrum
  double delta = 0.1;
  std::optional<double> eta, omega, beta, T_horizon;
  double manifold_dt = 0.05;
  std::vector<double> eps_ladder{0.1, 0.03, 0.01};
  double conditional_T = 40.0;
  double conditional_amplitude = 1e-2;
  double offset = 1e-4;
  double reproject_every = 2.0;
  // evolution
  double T = 60.0;
  double dt = 0.05;
  double record_dt = 0.5;
  V0Recipe v0;
  std::vector<double> E0_ladder;
  std::string phase = "least_squares";
  double fit_from = 5.0;
  std::string output_root = "shocklab_out";
  std::uint64_t seed = 7;
};

// Strict parse: unknown keys, wrong types and bad values raise ConfigError.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& c);

CatalogModel resolve_model(const ExperimentConfig& c);

}  // namespace shocklab::cli
