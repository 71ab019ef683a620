#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "hybridrank/dataset.hpp"
#include "hybridrank/llm_client.hpp"
#include "hybridrank/mock_llm.hpp"
#include "hybridrank/ranker.hpp"

namespace hybridrank {

enum class MergeMode { evaluation, deployment };
enum class CandidateSource { test_items, rs_top_n };

// One experiment, fully determined: dataset + split + model + weak-user
// thresholds + ranking backend + seeds. Unknown keys anywhere are rejected;
// errors carry the dotted field path.
struct RunConfig {
  struct DatasetCfg {
    std::string path;  // directory holding the ratings/catalog files
    DatasetFormat format = DatasetFormat::ml100k;
    std::size_t min_interactions = 20;
  } dataset;

  struct SplitCfg {
    std::array<double, 3> ratios{0.8, 0.1, 0.1};
    std::uint64_t seed = 42;
  } split;

  struct ModelCfg {
    RankerKind kind = RankerKind::itemknn;
    bool grid_search = false;
    HyperParams hp;
  } model;

  struct ThresholdsCfg {
    double t_p = 0.5;
    std::optional<double> t_s;                // absent: mean sparsity of the corpus
    std::optional<double> relevance_cutoff;   // absent: by rating scale
    int n_sampled_negatives = 100;
  } thresholds;

  struct LlmCfg {
    bool use_mock = true;
    MockKind mock_kind = MockKind::oracle;
    double noise_p = 0.1;
    int hallucination_count = 2;
    LlmEndpoint endpoint;
    int history_cap = 20;
    CandidateSource candidates = CandidateSource::test_items;
    int rs_top_n = 10;
    double per_query_seconds = 8.0;
  } llm;

  MergeMode merge_mode = MergeMode::evaluation;
  std::string output_dir = "out";

  struct Seeds {
    std::uint64_t train = 1;
    std::uint64_t shuffle = 2;
    std::uint64_t negatives = 3;
  } seeds;

  nlohmann::ordered_json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load_file(const std::filesystem::path& path);

  // Overrides every seed (split and derived streams) with one value.
  void override_seed(std::uint64_t seed);

  // Stable hash of the fields a trained model depends on; names cache files.
  std::uint64_t model_cache_key() const;
  // Stable hash of everything; stamps artifacts so stale ones are detected.
  std::uint64_t config_hash() const;
};

std::string to_string(MergeMode mode);
std::string to_string(CandidateSource source);

}  // namespace hybridrank
