#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "hybridrank/errors.hpp"

namespace hybridrank {

enum class DatasetFormat { ml100k, ml1m, bookcrossing };

DatasetFormat dataset_format_from_string(const std::string& name);
std::string to_string(DatasetFormat format);

struct RatingScale {
  double min = 1.0;
  double max = 5.0;
};

RatingScale scale_for(DatasetFormat format);

// One explicit-feedback event. user/item are dense indices into the Vocab.
// timestamp is -1 for formats without one.
struct Interaction {
  int user = -1;
  int item = -1;
  double rating = 0.0;
  long long timestamp = -1;
};

// Raw-id and title space shared by every split of one corpus.
struct Vocab {
  std::vector<std::string> user_ids;
  std::vector<std::string> item_ids;
  std::vector<std::string> item_titles;
  std::unordered_map<std::string, int> user_index;
  std::unordered_map<std::string, int> item_index;
  RatingScale scale;

  int user_count() const { return static_cast<int>(user_ids.size()); }
  int item_count() const { return static_cast<int>(item_ids.size()); }
};

struct IngestSummary {
  std::size_t users = 0;
  std::size_t items = 0;
  std::size_t interactions = 0;
  std::size_t duplicates_dropped = 0;
  std::size_t fallback_titles = 0;
  std::size_t replaced_encoding = 0;
};

// Interactions grouped per user (stable order) over a shared vocabulary.
class Dataset {
public:
  Dataset() = default;
  Dataset(std::shared_ptr<const Vocab> vocab, std::vector<Interaction> rows);

  int user_count() const { return vocab_ ? vocab_->user_count() : 0; }
  int item_count() const { return vocab_ ? vocab_->item_count() : 0; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }

  const std::vector<Interaction>& interactions() const { return rows_; }
  const Vocab& vocab() const { return *vocab_; }
  std::shared_ptr<const Vocab> vocab_ptr() const { return vocab_; }

  std::span<const Interaction> user_interactions(int user) const;
  std::size_t user_degree(int user) const;
  // Items of one user, ascending; backs O(log n) membership checks.
  std::span<const int> items_of(int user) const;
  bool contains(int user, int item) const;

private:
  std::shared_ptr<const Vocab> vocab_;
  std::vector<Interaction> rows_;
  std::vector<std::size_t> offsets_;
  std::vector<int> sorted_items_;
  std::vector<std::size_t> sorted_offsets_;
};

// item raw id -> title, plus counters for ingest reporting.
struct ItemCatalog {
  std::unordered_map<std::string, std::string> titles;
  std::size_t replaced_encoding = 0;
};

ItemCatalog parse_item_catalog(std::istream& in, DatasetFormat format);
ItemCatalog load_item_catalog(const std::filesystem::path& path, DatasetFormat format);

// Parses a ratings file. Duplicate (user, item) rows keep the last rating.
// Items missing from the catalog get "item-<raw id>" titles and are counted
// in summary.fallback_titles. Pass no catalog to use fallback titles only.
Dataset parse_ratings(std::istream& in, DatasetFormat format, const ItemCatalog* catalog,
                      IngestSummary& summary);
Dataset load_ratings_file(const std::filesystem::path& path, DatasetFormat format,
                          const ItemCatalog* catalog, IngestSummary& summary);

// Drops users with fewer than min_interactions events, then items left with
// no interactions; repeats until stable. Indices are reassigned contiguously
// preserving relative order. Throws StageError-worthy ParseError when nothing
// survives.
Dataset filter_min_interactions(const Dataset& data, std::size_t min_interactions);

}  // namespace hybridrank
