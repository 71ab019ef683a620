#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "hybridrank/pipeline.hpp"

namespace fs = std::filesystem;
using namespace hybridrank;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::size_t count_lines(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

std::size_t count_files(const fs::path& dir) {
  if (!fs::exists(dir)) return 0;
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    (void)e;
    ++n;
  }
  return n;
}

// Mixed 24-user corpus on disk plus a config tuned so several light users
// land in the weak set.
struct PipelineFixture {
  fixtures::TempDir tmp;
  fs::path data_dir;
  RunConfig cfg;

  PipelineFixture() {
    data_dir = tmp.path / "data";
    fixtures::write_mixed_corpus_files(data_dir);
    cfg.dataset.path = data_dir.string();
    cfg.dataset.format = DatasetFormat::ml100k;
    cfg.dataset.min_interactions = 5;
    cfg.split.ratios = {0.6, 0.2, 0.2};
    cfg.split.seed = 42;
    cfg.model.kind = RankerKind::itemknn;
    cfg.model.hp.k_neighbors = 20;
    cfg.model.hp.shrink = 0.1;
    cfg.thresholds.t_p = 0.5;
    cfg.thresholds.n_sampled_negatives = 10;
    cfg.llm.use_mock = true;
    cfg.llm.mock_kind = MockKind::oracle;
    cfg.llm.history_cap = 20;
    cfg.output_dir = (tmp.path / "out").string();
  }
};

}  // namespace

TEST_CASE("evaluation merge keeps the better-scoring list") {
  const RankedList rs{1, {10, 11}, ListSource::rs};
  const RankedList llm{1, {11, 10}, ListSource::llm};

  auto out = merge_rankings(rs, llm, 0.4, 0.8, MergeMode::evaluation);
  CHECK(out.items == llm.items);
  CHECK(out.source == ListSource::llm);

  out = merge_rankings(rs, llm, 0.8, 0.4, MergeMode::evaluation);
  CHECK(out.items == rs.items);
  CHECK(out.source == ListSource::rs);

  // ties keep the base list
  out = merge_rankings(rs, llm, 0.6, 0.6, MergeMode::evaluation);
  CHECK(out.source == ListSource::rs);

  // an unmeasurable side keeps the base list
  out = merge_rankings(rs, llm, std::nullopt, 0.9, MergeMode::evaluation);
  CHECK(out.source == ListSource::rs);
  out = merge_rankings(rs, llm, 0.9, std::nullopt, MergeMode::evaluation);
  CHECK(out.source == ListSource::rs);
}

TEST_CASE("deployment merge always trusts the reranker") {
  const RankedList rs{1, {10, 11}, ListSource::rs};
  const RankedList llm{1, {11, 10}, ListSource::llm};
  auto out = merge_rankings(rs, llm, 0.9, 0.1, MergeMode::deployment);
  CHECK(out.items == llm.items);
  CHECK(out.source == ListSource::llm);
  out = merge_rankings(rs, llm, std::nullopt, std::nullopt, MergeMode::deployment);
  CHECK(out.source == ListSource::llm);
}

TEST_CASE("query budget arithmetic") {
  const auto cost = cost_report(330, 943, 8.0);
  CHECK(cost.n_queries == 330);
  CHECK(cost.hybrid_seconds == 2640.0);
  CHECK(cost.all_users_seconds == 7544.0);
  CHECK(cost.savings_pct == doctest::Approx(100.0 * (1.0 - 2640.0 / 7544.0)).epsilon(1e-12));

  const auto none = cost_report(0, 10, 2.0);
  CHECK(none.hybrid_seconds == 0.0);
  CHECK(none.savings_pct == 100.0);

  CHECK_THROWS_AS(cost_report(5, 3, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(cost_report(-1, 3, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(cost_report(1, 3, 0.0), std::invalid_argument);
}

TEST_CASE("weak users stay weak unless the reranked score clears the bar") {
  std::vector<UserAssessment> weak(3);
  weak[0].user = 1;
  weak[1].user = 2;
  weak[2].user = 3;
  const std::unordered_map<int, double> auc{{1, 0.9}, {2, 0.5}, {3, 0.2}};
  CHECK(weak_count_after(weak, auc, 0.5) == 2);  // exactly t_p still counts as weak
  CHECK(weak_count_after(weak, auc, 0.1) == 0);
  CHECK(weak_count_after({}, {}, 0.5) == 0);

  const std::unordered_map<int, double> missing{{1, 0.9}};
  CHECK_THROWS_AS(weak_count_after(weak, missing, 0.5), std::invalid_argument);
}

TEST_CASE("assess writes the full artifact set") {
  PipelineFixture fx;
  std::ostringstream log;
  const auto assessments = run_assess(fx.cfg, &log);
  REQUIRE(assessments.size() == 24);

  const fs::path out = fx.cfg.output_dir;
  REQUIRE(fs::exists(out / "ingest_summary.json"));
  REQUIRE(fs::exists(out / "assessment.csv"));
  REQUIRE(fs::exists(out / "weak_users.txt"));
  REQUIRE(fs::exists(out / "assess_meta.json"));
  CHECK(count_files(out / "cache") == 1);

  const std::string csv = read_file(out / "assessment.csv");
  CHECK(csv.rfind("user_id,n_train,n_test,sparsity_index,auc_rs,inactive,weak\n", 0) == 0);
  CHECK(count_lines(csv) == 25);

  std::size_t weak_count = 0;
  for (const auto& a : assessments) {
    CHECK(a.n_train >= 1);
    if (a.weak) ++weak_count;
  }
  CHECK(weak_count > 0);
  CHECK(count_lines(read_file(out / "weak_users.txt")) == weak_count);

  const auto meta = nlohmann::json::parse(read_file(out / "assess_meta.json"));
  CHECK(meta.at("weak_users").size() == weak_count);
  CHECK(meta.at("t_p") == 0.5);

  const auto ingest = nlohmann::json::parse(read_file(out / "ingest_summary.json"));
  CHECK(ingest.at("users") == 24);
  CHECK(ingest.at("items") == 40);

  CHECK(log.str().find("model trained and cached") != std::string::npos);
}

TEST_CASE("a second assess run reuses the cached model") {
  PipelineFixture fx;
  run_assess(fx.cfg, nullptr);
  const std::string first_csv = read_file(fs::path(fx.cfg.output_dir) / "assessment.csv");

  std::ostringstream log;
  run_assess(fx.cfg, &log);
  CHECK(log.str().find("model cache hit") != std::string::npos);
  CHECK(read_file(fs::path(fx.cfg.output_dir) / "assessment.csv") == first_csv);
}

TEST_CASE("an oracle reranker rescues most weak users") {
  PipelineFixture fx;
  const auto report = run_hybrid(fx.cfg, nullptr);

  REQUIRE(report.rows.size() == 24);
  CHECK(report.weak_before > 0);
  CHECK(report.weak_after <= report.weak_before);
  CHECK(report.llm_kind == "mock:oracle");
  CHECK(report.template_version == "1");
  CHECK(report.cost.n_queries == report.weak_before);

  int promptable_weak = 0;
  for (const auto& row : report.rows) {
    if (!row.weak) {
      CHECK_FALSE(row.auc_llm.has_value());
      CHECK(row.source == ListSource::rs);
      continue;
    }
    if (row.source != ListSource::rs_fallback) ++promptable_weak;
    // the oracle ranks every relevant candidate on top, so a defined reranked
    // score beats or matches any base score
    if (row.auc_llm && row.auc_rs_defined) CHECK(*row.auc_llm >= row.auc_rs);
  }
  CHECK(promptable_weak > 0);
  CHECK(report.unpromptable == 0);
  CHECK(report.parse_failures == 0);

  if (report.base.auc_weak && report.hybrid.auc_weak) {
    CHECK(*report.hybrid.auc_weak > *report.base.auc_weak);
  }

  const fs::path out = fx.cfg.output_dir;
  REQUIRE(fs::exists(out / "report.json"));
  REQUIRE(fs::exists(out / "weak_counts.csv"));
  CHECK(count_files(out / "prompts") == static_cast<std::size_t>(report.weak_before));
  CHECK(count_files(out / "responses") == static_cast<std::size_t>(report.weak_before));

  const std::string csv = read_file(out / "weak_counts.csv");
  CHECK(csv.rfind("model,llm_kind,weak_before,weak_after,reduction_pct\n", 0) == 0);
  CHECK(csv.find("itemknn,mock:oracle," + std::to_string(report.weak_before) + "," +
                 std::to_string(report.weak_after) + ",") != std::string::npos);
}

TEST_CASE("an echo reranker never degrades anyone") {
  PipelineFixture fx;
  fx.cfg.llm.mock_kind = MockKind::echo;
  const auto report = run_hybrid(fx.cfg, nullptr);
  CHECK(report.weak_before > 0);
  CHECK(report.weak_after <= report.weak_before);
  for (const auto& row : report.rows) {
    if (row.auc_rs_defined && row.auc_final) {
      CHECK(*row.auc_final >= row.auc_rs);
    }
  }
}

TEST_CASE("reports are byte-identical across repeated cold runs") {
  PipelineFixture fx;
  const auto r1 = run_hybrid(fx.cfg, nullptr);
  const std::string report1 = read_file(fs::path(fx.cfg.output_dir) / "report.json");
  const std::string csv1 = read_file(fs::path(fx.cfg.output_dir) / "assessment.csv");
  CHECK_FALSE(r1.model_cache_hit);

  fs::remove_all(fx.cfg.output_dir);
  const auto r2 = run_hybrid(fx.cfg, nullptr);
  CHECK(read_file(fs::path(fx.cfg.output_dir) / "report.json") == report1);
  CHECK(read_file(fs::path(fx.cfg.output_dir) / "assessment.csv") == csv1);

  // warm rerun differs only in the cache flag
  const auto r3 = run_hybrid(fx.cfg, nullptr);
  CHECK(r3.model_cache_hit);
  CHECK(r3.weak_before == r2.weak_before);
  CHECK(r3.weak_after == r2.weak_after);
}

TEST_CASE("summary numbers are lifted verbatim from the report") {
  PipelineFixture fx;
  const auto report = run_hybrid(fx.cfg, nullptr);
  const std::string summary = render_summary(report);
  const auto j = nlohmann::json::parse(read_file(fs::path(fx.cfg.output_dir) / "report.json"));

  const auto digits = [](const nlohmann::json& v) { return v.dump(); };
  CHECK(summary.find("t_s=" + digits(j["thresholds_resolved"]["t_s"])) != std::string::npos);
  CHECK(summary.find("auc=" + digits(j["aggregates"]["rs"]["auc"])) != std::string::npos);
  CHECK(summary.find("(savings " + digits(j["cost"]["savings_pct"]) + "%)") != std::string::npos);
  CHECK(summary.find("weak users: " + std::to_string(report.weak_before)) != std::string::npos);
  CHECK(j["weak"]["before"] == report.weak_before);
  CHECK(j["weak"]["after"] == report.weak_after);
  CHECK(j["model"]["kind"] == "itemknn");
  CHECK(j["users"].size() == 24);
}

TEST_CASE("prompt rendering requires a matching assessment") {
  PipelineFixture fx;
  CHECK_THROWS_AS(run_prompts(fx.cfg, nullptr), StageError);

  run_assess(fx.cfg, nullptr);
  std::ostringstream log;
  run_prompts(fx.cfg, &log);
  const std::size_t weak_count =
      count_lines(read_file(fs::path(fx.cfg.output_dir) / "weak_users.txt"));
  CHECK(count_files(fs::path(fx.cfg.output_dir) / "prompts") == weak_count);
  CHECK(log.str().find("wrote " + std::to_string(weak_count) + " prompts") != std::string::npos);

  // a config change invalidates the stored assessment
  fx.cfg.thresholds.t_p = 0.4;
  try {
    run_prompts(fx.cfg, nullptr);
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(std::string(e.what()).find("different config") != std::string::npos);
  }
}

TEST_CASE("prompt files carry the frozen template and the user history") {
  PipelineFixture fx;
  run_assess(fx.cfg, nullptr);
  run_prompts(fx.cfg, nullptr);
  const fs::path dir = fs::path(fx.cfg.output_dir) / "prompts";
  REQUIRE(count_files(dir) > 0);
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string text = read_file(entry.path());
    CHECK(text.find("liked the following movies in decreasing order of preference") !=
          std::string::npos);
    CHECK(text.find("Now, rank the following items") != std::string::npos);
    CHECK(text.find("1. ") != std::string::npos);
  }
}

TEST_CASE("users without held-out items fall back to the base list") {
  fixtures::TempDir tmp;
  const fs::path data_dir = tmp.path / "data";
  fs::create_directories(data_dir);
  // degrees 4, 4, 8: the two light users sit below the mean sparsity
  std::ofstream ratings(data_dir / "u.data", std::ios::binary);
  long long ts = 1;
  for (int i = 1; i <= 4; ++i) ratings << "1\t" << i << "\t3\t" << ts++ << "\n";
  for (int i = 3; i <= 6; ++i) ratings << "2\t" << i << "\t3\t" << ts++ << "\n";
  for (int i = 1; i <= 8; ++i) ratings << "3\t" << i << "\t4\t" << ts++ << "\n";
  ratings.close();

  RunConfig cfg;
  cfg.dataset.path = data_dir.string();
  cfg.dataset.min_interactions = 2;
  cfg.split.ratios = {0.9, 0.05, 0.05};
  cfg.model.kind = RankerKind::itemknn;
  cfg.output_dir = (tmp.path / "out").string();

  const auto report = run_hybrid(cfg, nullptr);
  REQUIRE(report.rows.size() == 3);
  CHECK(report.weak_before == 2);
  CHECK(report.unpromptable == 2);
  CHECK(report.weak_after == 2);  // nothing to rerank; both stay weak
  for (const auto& row : report.rows) {
    if (row.weak) {
      CHECK(row.source == ListSource::rs_fallback);
      CHECK_FALSE(row.auc_llm.has_value());
      CHECK_FALSE(row.auc_rs_defined);
    }
  }
}

TEST_CASE("grid search tries every tabulated configuration") {
  PipelineFixture fx;
  fx.cfg.model.grid_search = true;
  std::ostringstream log;
  const auto report = run_hybrid(fx.cfg, &log);
  CHECK(report.grid_configs_tried == 35);  // 7 neighbor counts x 5 shrinks
  CHECK(log.str().find("grid search tried 35 configs") != std::string::npos);
}

TEST_CASE("candidates can come from the base ranker's top slate") {
  PipelineFixture fx;
  fx.cfg.llm.candidates = CandidateSource::rs_top_n;
  fx.cfg.llm.rs_top_n = 8;
  const auto report = run_hybrid(fx.cfg, nullptr);
  CHECK(report.weak_before > 0);
  CHECK(report.unpromptable == 0);

  const fs::path prompts = fs::path(fx.cfg.output_dir) / "prompts";
  for (const auto& entry : fs::directory_iterator(prompts)) {
    const std::string text = read_file(entry.path());
    // candidate list sits between the two template sentences; 8 items at most
    const auto start = text.find("Now, rank");
    REQUIRE(start != std::string::npos);
    CHECK(text.find("9. ", start) == std::string::npos);
  }
}

TEST_CASE("a backend returning prose no candidate matches is a parse failure") {
  httplib::Server server;
  server.Post("/v1/chat/completions", [](const httplib::Request&, httplib::Response& res) {
    nlohmann::json j;
    j["choices"][0]["message"]["content"] = "I am sorry, I cannot rank those.";
    res.set_content(j.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  PipelineFixture fx;
  fx.cfg.llm.use_mock = false;
  fx.cfg.llm.endpoint.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
  fx.cfg.llm.endpoint.model_name = "prose-bot";
  fx.cfg.llm.endpoint.max_concurrency = 3;
  const auto report = run_hybrid(fx.cfg, nullptr);
  server.stop();
  thread.join();

  CHECK(report.weak_before > 0);
  CHECK(report.parse_failures == report.weak_before);
  CHECK(report.weak_after == report.weak_before);  // scores inherited, no rescue
  CHECK(report.llm_kind == "prose-bot");
  for (const auto& row : report.rows) {
    if (row.weak) {
      CHECK(row.parse_failed);
      CHECK(row.source == ListSource::rs_fallback);
      CHECK(row.llm_attempts == 1);
      // weak users get a defined base score or inherit zero; either way the
      // served list is the base one
      CHECK_FALSE(row.auc_llm.has_value());
    }
  }
  // prompts and responses are still written for inspection
  CHECK(count_files(fs::path(fx.cfg.output_dir) / "responses") ==
        static_cast<std::size_t>(report.weak_before));
}

TEST_CASE("a dead backend marks weak users as failed after retries") {
  httplib::Server server;
  server.Post("/v1/chat/completions", [](const httplib::Request&, httplib::Response& res) {
    res.status = 503;
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  PipelineFixture fx;
  fx.cfg.llm.use_mock = false;
  fx.cfg.llm.endpoint.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
  fx.cfg.llm.endpoint.retry.max_attempts = 2;
  fx.cfg.llm.endpoint.retry.backoff_base_seconds = 0.001;
  std::ostringstream log;
  const auto report = run_hybrid(fx.cfg, &log);
  server.stop();
  thread.join();

  CHECK(report.parse_failures == report.weak_before);
  CHECK(report.weak_after == report.weak_before);
  CHECK(log.str().find("failed") != std::string::npos);
  for (const auto& row : report.rows) {
    if (row.weak) {
      CHECK(row.parse_failed);
      CHECK(row.llm_attempts == 2);
    }
  }
  CHECK(count_files(fs::path(fx.cfg.output_dir) / "responses") == 0);
}

TEST_CASE("missing ratings files fail in the ingest stage") {
  fixtures::TempDir tmp;
  RunConfig cfg;
  cfg.dataset.path = (tmp.path / "nowhere").string();
  cfg.output_dir = (tmp.path / "out").string();
  try {
    run_assess(cfg, nullptr);
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == std::string("ingest"));
    CHECK(std::string(e.what()).find("ratings file not found") != std::string::npos);
  }
}

TEST_CASE("threshold conflicts with the rating scale stay config errors") {
  PipelineFixture fx;
  fx.cfg.thresholds.relevance_cutoff = 9.0;  // 1-5 scale
  try {
    run_assess(fx.cfg, nullptr);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == std::string("thresholds.relevance_cutoff"));
  }
}

TEST_CASE("one seed override pins every stream") {
  RunConfig cfg;
  cfg.split.seed = 1;
  cfg.seeds = {2, 3, 4};
  const auto before = cfg.config_hash();
  cfg.override_seed(99);
  CHECK(cfg.split.seed == 99);
  CHECK(cfg.seeds.train == 99);
  CHECK(cfg.seeds.shuffle == 99);
  CHECK(cfg.seeds.negatives == 99);
  CHECK(cfg.config_hash() != before);
}
