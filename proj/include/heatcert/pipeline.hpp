#pragma once

#include <optional>
#include <string>
#include <vector>

#include "heatcert/checkers.hpp"

namespace heatcert {

/// Usage / guard / input errors; the CLI maps these to exit code 2.
struct PipelineError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PipelineConfig {
  std::string graph_file;
  std::string family;
  MeasureMode measure = MeasureMode::counting;
  std::string metric_choice = "default";  // default | combinatorial | <file>
  double r1 = 0.0;
  double r2 = 0.0;
  double n = 3.0;
  std::vector<double> dim_thresholds;  // optional step dimension table
  std::vector<double> dim_values;
  double phi_seed = 0.0;  // 0 => measure phi* and round up
  std::string gamma_spec = "theorem-1.4";  // or "explicit:<value>"
  int tgrid_per_decade = 64;
  double t_max = 0.0;  // 0 => max(1e6, 4 R2^2)
  int restarts = 20;
  int max_iterations = 400;
  double tolerance = 1e-9;
  uint64_t seed = 1;
  bool relaxed_guards = false;
  std::string out_dir;
  std::string center;  // vertex id; empty => first vertex
  int sample_radii = 3;
  int sample_centers = 4;
  bool full_centers = false;
  bool vertex_transitive = false;

  Json to_json() const;
  static PipelineConfig from_json(const Json& j);
  WeightedGraph make_graph() const;
  EdgeWeights make_weights(const WeightedGraph& g) const;
  DimensionSpec make_dimension() const;
};

/// One G-profile row for the kernel-vs-bound CSV.
struct ProfileRow {
  std::string x, y;
  double t = 0.0;
  double log_p = 0.0;  // floored values carry log(1e-300)
  double log_bound = 0.0;
};

struct Report {
  Json metadata = Json::object();
  std::vector<Certificate> certificates;
  Json constants = Json::array();  // rows (quantity, x, r, R, log_value)
  std::vector<ProfileRow> gaussian_profile;
  bool all_pass = false;
  std::string summary;

  const Certificate* find(const std::string& condition) const;
  void add_constant(const std::string& quantity, const std::string& x, double r,
                    double R, double log_value);
  void finish();
  Json to_json() const;
};

/// Theorem workflows. Reverse runs consume the forward report (pass nullptr
/// to have the forward half recomputed internally).
Report run_forward_normalizing(const PipelineConfig& config);
Report run_reverse_normalizing(const PipelineConfig& config,
                               const Report* forward);
Report run_counting(const PipelineConfig& config);
Report run_general(const PipelineConfig& config);

/// Writes report.json plus certificates.csv, constants.csv and, when a G
/// certificate was evaluated, profile_gaussian.csv (one row per grid point).
void emit_report(const Report& report, const std::string& out_dir);

}  // namespace heatcert
