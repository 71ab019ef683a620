#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "hybridrank.h"

namespace fs = std::filesystem;

namespace {

// Owns a corpus on disk plus a config file pointing at it.
struct ApiFixture {
  fixtures::TempDir tmp;
  fs::path config_path;
  fs::path output_dir;

  explicit ApiFixture(const std::function<void(nlohmann::json&)>& edit = nullptr) {
    const fs::path data_dir = tmp.path / "data";
    fixtures::write_mixed_corpus_files(data_dir);
    output_dir = tmp.path / "out";

    nlohmann::json cfg;
    cfg["dataset"] = {{"path", data_dir.string()}, {"format", "ml100k"}, {"min_interactions", 5}};
    cfg["split"] = {{"ratios", {0.6, 0.2, 0.2}}, {"seed", 42}};
    cfg["model"] = {{"kind", "itemknn"}, {"hyperparams", {{"k_neighbors", 20}, {"shrink", 0.1}}}};
    cfg["thresholds"] = {{"t_p", 0.5}, {"n_sampled_negatives", 10}};
    cfg["llm"] = {{"mode", "mock"}, {"mock", {{"kind", "oracle"}}}};
    cfg["output_dir"] = output_dir.string();
    if (edit) edit(cfg);

    config_path = tmp.path / "config.json";
    std::ofstream out(config_path, std::ios::binary);
    out << cfg.dump(2) << "\n";
  }
};

struct Session {
  hr_session* s = hr_session_new();
  ~Session() { hr_session_free(s); }
  operator hr_session*() const { return s; }
};

}  // namespace

TEST_CASE("the library reports a version") {
  REQUIRE(hr_version() != nullptr);
  CHECK(std::string(hr_version()) == "1.0.0");
}

TEST_CASE("sessions survive creation, misuse, and teardown") {
  Session s;
  REQUIRE(s.s != nullptr);
  CHECK(std::string(hr_session_last_error(s)) == "");
  CHECK(std::string(hr_session_summary(s)) == "");
  hr_session_free(nullptr);  // must be a no-op

  CHECK(hr_session_load_config(nullptr, "x") == HR_ERR_CONFIG);
  CHECK(hr_session_run(nullptr) == HR_ERR_CONFIG);
  CHECK(std::string(hr_session_last_error(nullptr)) == "null session");
}

TEST_CASE("loading a missing config file fails with a config error") {
  Session s;
  CHECK(hr_session_load_config(s, "/nonexistent/config.json") == HR_ERR_CONFIG);
  const std::string err = hr_session_last_error(s);
  CHECK(err.rfind("config error: ", 0) == 0);
  CHECK(err.find("cannot open") != std::string::npos);
}

TEST_CASE("a null config path is rejected") {
  Session s;
  CHECK(hr_session_load_config(s, nullptr) == HR_ERR_CONFIG);
  CHECK(std::string(hr_session_last_error(s)).find("null") != std::string::npos);
}

TEST_CASE("out-of-range thresholds surface their field path") {
  ApiFixture fx([](nlohmann::json& cfg) { cfg["thresholds"]["t_p"] = 1.5; });
  Session s;
  CHECK(hr_session_load_config(s, fx.config_path.string().c_str()) == HR_ERR_CONFIG);
  const std::string err = hr_session_last_error(s);
  CHECK(err.find("thresholds.t_p") != std::string::npos);
  CHECK(err.find("[0, 1)") != std::string::npos);
}

TEST_CASE("commands refuse to run without a loaded config") {
  Session s;
  CHECK(hr_session_run(s) == HR_ERR_CONFIG);
  CHECK(std::string(hr_session_last_error(s)).find("no configuration loaded") !=
        std::string::npos);
  CHECK(hr_session_assess(s) == HR_ERR_CONFIG);
  CHECK(hr_session_prompts(s) == HR_ERR_CONFIG);
  CHECK(hr_session_set_output_dir(s, "somewhere") == HR_ERR_CONFIG);
  CHECK(hr_session_set_seed(s, 7) == HR_ERR_CONFIG);
}

TEST_CASE("assess and run produce artifacts through the C interface") {
  ApiFixture fx;
  Session s;
  REQUIRE(hr_session_load_config(s, fx.config_path.string().c_str()) == HR_OK);

  REQUIRE(hr_session_assess(s) == HR_OK);
  CHECK(std::string(hr_session_last_error(s)) == "");
  CHECK(std::string(hr_session_summary(s)).find("assessed 24 users") != std::string::npos);
  CHECK(fs::exists(fx.output_dir / "assessment.csv"));

  REQUIRE(hr_session_prompts(s) == HR_OK);
  CHECK(fs::exists(fx.output_dir / "prompts"));

  REQUIRE(hr_session_run(s) == HR_OK);
  const std::string summary = hr_session_summary(s);
  CHECK(summary.find("weak users:") != std::string::npos);
  CHECK(summary.find("itemknn + mock:oracle") != std::string::npos);
  CHECK(std::string(hr_session_log(s)).find("[ingest]") != std::string::npos);
  CHECK(fs::exists(fx.output_dir / "report.json"));
  CHECK(fs::exists(fx.output_dir / "weak_counts.csv"));
}

TEST_CASE("output dir and seed overrides steer the next command") {
  ApiFixture fx;
  Session s;
  REQUIRE(hr_session_load_config(s, fx.config_path.string().c_str()) == HR_OK);

  const fs::path elsewhere = fx.tmp.path / "elsewhere";
  REQUIRE(hr_session_set_output_dir(s, elsewhere.string().c_str()) == HR_OK);
  REQUIRE(hr_session_set_seed(s, 7) == HR_OK);
  REQUIRE(hr_session_run(s) == HR_OK);
  CHECK(fs::exists(elsewhere / "report.json"));
  CHECK_FALSE(fs::exists(fx.output_dir / "report.json"));

  CHECK(hr_session_set_output_dir(s, "") == HR_ERR_CONFIG);
  CHECK(std::string(hr_session_last_error(s)).find("output_dir") != std::string::npos);
}

TEST_CASE("stage failures carry the stage name") {
  ApiFixture fx([](nlohmann::json& cfg) { cfg["dataset"]["path"] = "/nonexistent/corpus"; });
  Session s;
  REQUIRE(hr_session_load_config(s, fx.config_path.string().c_str()) == HR_OK);
  CHECK(hr_session_run(s) == HR_ERR_RUN);
  const std::string err = hr_session_last_error(s);
  CHECK(err.rfind("error [stage=ingest]: ", 0) == 0);
  CHECK(err.find("ratings file not found") != std::string::npos);

  // a later success clears the error
  REQUIRE(hr_session_set_output_dir(s, (fx.tmp.path / "x").string().c_str()) == HR_OK);
  CHECK(std::string(hr_session_last_error(s)) == "");
}

TEST_CASE("unknown config keys are rejected with their dotted path") {
  ApiFixture fx([](nlohmann::json& cfg) { cfg["llm"]["mock"]["typo_key"] = 1; });
  Session s;
  CHECK(hr_session_load_config(s, fx.config_path.string().c_str()) == HR_ERR_CONFIG);
  const std::string err = hr_session_last_error(s);
  CHECK(err.find("llm.mock.typo_key") != std::string::npos);
  CHECK(err.find("unknown key") != std::string::npos);
}
