#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "hybridrank/dataset.hpp"
#include "hybridrank/rng.hpp"

namespace fixtures {

struct TempDir {
  std::filesystem::path path;

  TempDir() {
    static std::atomic<int> counter{0};
    const auto base = std::filesystem::temp_directory_path();
    path = base / ("hybridrank_test_" + std::to_string(::getpid()) + "_" +
                   std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

using Row = std::tuple<int, int, double, long long>;  // user, item, rating, timestamp

// In-memory corpus with 1-based raw ids and generated titles.
inline hybridrank::Dataset make_dataset(int n_users, int n_items, const std::vector<Row>& rows) {
  auto vocab = std::make_shared<hybridrank::Vocab>();
  vocab->scale = {1.0, 5.0};
  for (int u = 0; u < n_users; ++u) {
    vocab->user_index.emplace(std::to_string(u + 1), u);
    vocab->user_ids.push_back(std::to_string(u + 1));
  }
  for (int i = 0; i < n_items; ++i) {
    vocab->item_index.emplace(std::to_string(i + 1), i);
    vocab->item_ids.push_back(std::to_string(i + 1));
    std::ostringstream title;
    title << "Movie " << i + 1 << " (19" << 70 + i % 30 << ")";
    vocab->item_titles.push_back(title.str());
  }
  std::vector<hybridrank::Interaction> interactions;
  for (const auto& [u, i, r, ts] : rows) interactions.push_back({u, i, r, ts});
  return hybridrank::Dataset(std::move(vocab), std::move(interactions));
}

// Two disjoint taste clusters: every user rates every item of their own block
// and nothing else. Ideal for checking that a trained ranker separates the
// blocks and an untrained one does not.
inline hybridrank::Dataset two_block(int users_per_block, int items_per_block,
                                     double rating = 4.0) {
  std::vector<Row> rows;
  long long ts = 1000;
  for (int u = 0; u < 2 * users_per_block; ++u) {
    const int block = u < users_per_block ? 0 : 1;
    for (int k = 0; k < items_per_block; ++k) {
      rows.emplace_back(u, block * items_per_block + k, rating, ts++);
    }
  }
  return make_dataset(2 * users_per_block, 2 * items_per_block, rows);
}

// Mixed corpus for end-to-end tests: 16 heavy users with clear half-catalog
// preferences (learnable by any of the rankers) and 8 light users with
// scattered mostly-positive ratings, most of whom should land in the weak
// set. 24 users x 40 items.
inline std::vector<Row> mixed_corpus_rows() {
  std::vector<Row> rows;
  hybridrank::Rng rng(20240601);
  long long ts = 5000;
  const int n_items = 40;
  for (int u = 0; u < 16; ++u) {
    const int half = u % 2;
    const int base = half * (n_items / 2);
    // 14 in-half likes plus 4 out-of-half dislikes
    std::vector<int> own, other;
    for (int k = 0; k < n_items / 2; ++k) {
      own.push_back(base + k);
      other.push_back((n_items / 2 - 1 - k + (1 - half) * (n_items / 2)));
    }
    own = rng.sample(std::move(own), 14);
    other = rng.sample(std::move(other), 4);
    for (const int i : own) rows.emplace_back(u, i, 4.0 + static_cast<double>(rng.uniform(2)), ts++);
    for (const int i : other) rows.emplace_back(u, i, 1.0 + static_cast<double>(rng.uniform(2)), ts++);
  }
  for (int u = 16; u < 24; ++u) {
    std::vector<int> all;
    for (int i = 0; i < n_items; ++i) all.push_back(i);
    const std::size_t n = 10 + rng.uniform(5);  // 10..14 ratings
    all = rng.sample(std::move(all), n);
    for (const int i : all) {
      rows.emplace_back(u, i, 3.0 + static_cast<double>(rng.uniform(3)), ts++);
    }
  }
  return rows;
}

inline hybridrank::Dataset mixed_corpus() { return make_dataset(24, 40, mixed_corpus_rows()); }

// The same corpus as tab-separated rating lines plus a pipe-separated catalog,
// for exercising the file-based entry points end to end.
inline void write_mixed_corpus_files(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const hybridrank::Dataset data = mixed_corpus();
  std::ofstream ratings(dir / "u.data", std::ios::binary);
  for (const auto& r : data.interactions()) {
    ratings << data.vocab().user_ids[r.user] << '\t' << data.vocab().item_ids[r.item] << '\t'
            << r.rating << '\t' << r.timestamp << '\n';
  }
  std::ofstream catalog(dir / "u.item", std::ios::binary);
  for (int i = 0; i < data.item_count(); ++i) {
    catalog << data.vocab().item_ids[i] << '|' << data.vocab().item_titles[i]
            << "|01-Jan-1995||http://example.com\n";
  }
}

}  // namespace fixtures
