#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "heatcert/pipeline.hpp"

using namespace heatcert;

namespace {

PipelineConfig small_normalizing() {
  PipelineConfig cfg;
  cfg.family = "cycle_64";
  cfg.measure = MeasureMode::normalizing;
  cfg.metric_choice = "combinatorial";
  cfg.r1 = 2.0;
  cfg.r2 = 16.0;
  cfg.n = 3.0;
  cfg.tgrid_per_decade = 8;
  cfg.t_max = 1e4;
  cfg.restarts = 12;
  cfg.relaxed_guards = true;
  cfg.vertex_transitive = true;
  cfg.seed = 5;
  return cfg;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("guards refuse before computation") {
  PipelineConfig cfg = small_normalizing();
  cfg.r2 = 10.0;  // violates R2 >= 8 R1
  CHECK_THROWS_WITH_AS(run_forward_normalizing(cfg),
                       doctest::Contains("R2 >= 8 R1"), PipelineError);

  cfg = small_normalizing();
  cfg.r2 = 40.0;  // violates R2 <= diam/2 = 16
  CHECK_THROWS_WITH_AS(run_forward_normalizing(cfg),
                       doctest::Contains("diam/2"), PipelineError);

  cfg = small_normalizing();
  cfg.relaxed_guards = false;  // below theorem scale without the flag
  CHECK_THROWS_WITH_AS(run_forward_normalizing(cfg),
                       doctest::Contains("512"), PipelineError);

  cfg = small_normalizing();
  cfg.measure = MeasureMode::counting;
  CHECK_THROWS_AS(run_forward_normalizing(cfg), PipelineError);
}

TEST_CASE("forward and reverse normalizing on a relaxed small cycle") {
  PipelineConfig cfg = small_normalizing();
  Report fwd = run_forward_normalizing(cfg);
  CHECK(fwd.all_pass);
  CHECK(fwd.metadata.contains("watermark"));  // non-theorem regime
  REQUIRE(fwd.find("V") != nullptr);
  REQUIRE(fwd.find("G") != nullptr);
  CHECK(fwd.find("V")->pass);
  CHECK(fwd.find("G")->pass);
  CHECK(fwd.find("V")->has_flag("vertex_transitive_reduction"));

  Report rev = run_reverse_normalizing(cfg, &fwd);
  CHECK(rev.all_pass);
  const Certificate* s = rev.find("S");
  REQUIRE(s != nullptr);
  CHECK(s->pass);

  // mu on normalizing cycles counts the R1-ball: 2 R1 + 1
  bool saw_mu = false;
  for (const auto& row : rev.constants)
    if (row.at("quantity") == "mu") {
      CHECK(std::exp(row.at("log_value").get<double>()) ==
            doctest::Approx(2.0 * cfg.r1 + 1.0));
      saw_mu = true;
    }
  CHECK(saw_mu);

  // refusal when the forward report lacks its G certificate
  Report crippled = fwd;
  crippled.certificates.pop_back();  // drops G
  CHECK_THROWS_WITH_AS(run_reverse_normalizing(cfg, &crippled),
                       doctest::Contains("G certificate"), PipelineError);
}

TEST_CASE("counting pipeline on a relaxed polyline") {
  PipelineConfig cfg;
  cfg.family = "polyline_32_1";
  cfg.measure = MeasureMode::counting;
  cfg.r1 = 0.2;
  cfg.r2 = 3.2;
  cfg.n = 3.0;
  cfg.tgrid_per_decade = 8;
  cfg.t_max = 100.0;
  cfg.restarts = 12;
  cfg.relaxed_guards = true;
  cfg.full_centers = true;
  cfg.seed = 3;
  Report rep = run_counting(cfg);
  CHECK(rep.all_pass);
  CHECK(rep.metadata.contains("watermark"));
  for (const char* cond : {"L", "V", "G", "S"}) {
    const Certificate* c = rep.find(cond);
    REQUIRE(c != nullptr);
    CHECK(c->pass);
    CHECK(std::isfinite(c->min_log_margin));  // no overflow in log space
  }
  // the reverse table reports n' >= n
  for (const auto& row : rep.constants)
    if (row.at("quantity") == "n_prime")
      CHECK(std::exp(row.at("log_value").get<double>()) >= cfg.n);
}

TEST_CASE("general pipeline on a small grid") {
  PipelineConfig cfg;
  cfg.family = "grid_8x8";
  cfg.measure = MeasureMode::counting;
  cfg.r1 = 0.6;
  cfg.r2 = 2.6;
  cfg.n = 3.0;
  cfg.tgrid_per_decade = 6;
  cfg.t_max = 50.0;
  cfg.restarts = 10;
  cfg.relaxed_guards = true;
  cfg.seed = 9;
  Report rep = run_general(cfg);
  CHECK(rep.all_pass);
  for (const char* cond : {"L", "V", "G", "S"})
    REQUIRE(rep.find(cond) != nullptr);

  // explicit gamma = 1 reproduces the raw variable-dimension formulas
  PipelineConfig raw = cfg;
  raw.gamma_spec = "explicit:1";
  Report rep_raw = run_general(raw);
  CHECK(rep_raw.all_pass);
  bool saw = false;
  for (const auto& row : rep_raw.constants)
    if (row.at("quantity") == "log_phi_prime") {
      // phi^gamma(r) = 2^{49 + 2N/(N-2)} with gamma = 1, N = 3
      CHECK(row.at("log_value").get<double>() ==
            doctest::Approx((49.0 + 6.0) * kLn2));
      saw = true;
    }
  CHECK(saw);

  CHECK_THROWS_AS([&] {
    PipelineConfig bad = cfg;
    bad.gamma_spec = "explicit:0.5";
    run_general(bad);
  }(), PipelineError);
}

TEST_CASE("reports are deterministic and emitted completely") {
  namespace fs = std::filesystem;
  PipelineConfig cfg = small_normalizing();
  Report a = run_forward_normalizing(cfg);
  Report b = run_forward_normalizing(cfg);
  CHECK(a.to_json().dump(2) == b.to_json().dump(2));

  fs::path dir = fs::temp_directory_path() / "heatcert_report_test";
  fs::remove_all(dir);
  emit_report(a, dir.string());
  CHECK(fs::exists(dir / "report.json"));
  CHECK(fs::exists(dir / "certificates.csv"));
  CHECK(fs::exists(dir / "constants.csv"));
  CHECK(fs::exists(dir / "profile_gaussian.csv"));

  // profile row count equals the count the G certificate declares for it
  const Certificate* g = a.find("G");
  REQUIRE(g != nullptr);
  std::string profile = slurp(dir / "profile_gaussian.csv");
  long long rows = std::count(profile.begin(), profile.end(), '\n') - 1;
  CHECK(rows == g->grid.at("profile_points").get<long long>());

  // byte-identical re-emission
  std::string first = slurp(dir / "report.json");
  emit_report(b, dir.string());
  CHECK(slurp(dir / "report.json") == first);
  fs::remove_all(dir);

  // empty certificate list: valid JSON, summary "vacuous"
  Report empty;
  empty.finish();
  CHECK(empty.summary == "vacuous");
  CHECK(empty.to_json().at("pass_summary").at("summary") == "vacuous");
}

TEST_CASE("config round-trips through JSON") {
  PipelineConfig cfg = small_normalizing();
  cfg.gamma_spec = "explicit:2";
  cfg.dim_thresholds = {0.0, 3.0};
  cfg.dim_values = {3.0, 4.0};
  PipelineConfig back = PipelineConfig::from_json(cfg.to_json());
  CHECK(back.to_json() == cfg.to_json());
  CHECK(back.family == "cycle_64");
  CHECK(back.vertex_transitive);
}
