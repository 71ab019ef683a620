#include "hybridrank/dataset.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>

namespace hybridrank {

namespace {

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

bool valid_utf8(const std::string& s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const unsigned char c = s[i];
    std::size_t extra;
    if (c < 0x80) {
      extra = 0;
    } else if ((c >> 5) == 0x6) {
      extra = 1;
    } else if ((c >> 4) == 0xe) {
      extra = 2;
    } else if ((c >> 3) == 0x1e) {
      extra = 3;
    } else {
      return false;
    }
    if (i + extra >= s.size()) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) >> 6) != 0x2) return false;
    }
    i += extra + 1;
  }
  return true;
}

std::string latin1_to_utf8(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (const unsigned char c : s) {
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back(static_cast<char>(0xc0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3f)));
    }
  }
  return out;
}

// Titles arrive either as UTF-8 or as ISO-8859-1 (MovieLens and Book-Crossing
// dumps). Non-UTF-8 byte sequences are reinterpreted as ISO-8859-1 and counted.
std::string ensure_utf8(const std::string& s, std::size_t& replaced) {
  if (valid_utf8(s)) return s;
  ++replaced;
  return latin1_to_utf8(s);
}

std::vector<std::string> split_on(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::vector<std::string> split_on_str(const std::string& line, const std::string& sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + sep.size();
  }
  return out;
}

// Book-Crossing CSV: semicolon separated, every field double quoted, embedded
// quotes escaped as \" (and occasionally doubled).
std::vector<std::string> split_csv_semicolon(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '\\' && i + 1 < line.size() && line[i + 1] == '"') {
        field.push_back('"');
        ++i;
      } else if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field.push_back('"');
        ++i;
      } else if (c == '"') {
        in_quotes = false;
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ';') {
      out.push_back(field);
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  out.push_back(field);
  return out;
}

double parse_rating_field(const std::string& s, std::size_t line_no) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') {
    throw ParseError("bad rating '" + s + "'", line_no);
  }
  return v;
}

long long parse_ll_field(const std::string& s, std::size_t line_no, const char* what) {
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0') {
    throw ParseError(std::string("bad ") + what + " '" + s + "'", line_no);
  }
  return v;
}

struct RawRow {
  std::string user;
  std::string item;
  double rating = 0.0;
  long long timestamp = -1;
};

bool parse_row(const std::string& line, DatasetFormat format, std::size_t line_no, RawRow& row) {
  switch (format) {
    case DatasetFormat::ml100k: {
      const auto f = split_on(line, '\t');
      if (f.size() != 4) throw ParseError("expected 4 tab separated fields", line_no);
      row = {f[0], f[1], parse_rating_field(f[2], line_no), parse_ll_field(f[3], line_no, "timestamp")};
      return true;
    }
    case DatasetFormat::ml1m: {
      const auto f = split_on_str(line, "::");
      if (f.size() != 4) throw ParseError("expected 4 '::' separated fields", line_no);
      row = {f[0], f[1], parse_rating_field(f[2], line_no), parse_ll_field(f[3], line_no, "timestamp")};
      return true;
    }
    case DatasetFormat::bookcrossing: {
      const auto f = split_csv_semicolon(line);
      if (f.size() != 3) throw ParseError("expected 3 ';' separated fields", line_no);
      if (line_no == 1 && f[0] == "User-ID") return false;  // header
      row = {trim(f[0]), trim(f[1]), parse_rating_field(f[2], line_no), -1};
      return true;
    }
  }
  throw ParseError("unknown dataset format", line_no);
}

}  // namespace

DatasetFormat dataset_format_from_string(const std::string& name) {
  if (name == "ml100k" || name == "ml-100k") return DatasetFormat::ml100k;
  if (name == "ml1m" || name == "ml-1m") return DatasetFormat::ml1m;
  if (name == "bookcrossing" || name == "book-crossing") return DatasetFormat::bookcrossing;
  throw ParseError("unknown dataset format '" + name + "'");
}

std::string to_string(DatasetFormat format) {
  switch (format) {
    case DatasetFormat::ml100k: return "ml100k";
    case DatasetFormat::ml1m: return "ml1m";
    case DatasetFormat::bookcrossing: return "bookcrossing";
  }
  return "?";
}

RatingScale scale_for(DatasetFormat format) {
  if (format == DatasetFormat::bookcrossing) return {0.0, 10.0};
  return {1.0, 5.0};
}

Dataset::Dataset(std::shared_ptr<const Vocab> vocab, std::vector<Interaction> rows)
    : vocab_(std::move(vocab)) {
  const std::size_t n_users = static_cast<std::size_t>(vocab_->user_count());
  std::vector<std::size_t> counts(n_users + 1, 0);
  for (const auto& r : rows) {
    if (r.user < 0 || r.user >= vocab_->user_count() || r.item < 0 || r.item >= vocab_->item_count()) {
      throw ParseError("interaction index out of range");
    }
    ++counts[static_cast<std::size_t>(r.user) + 1];
  }
  offsets_.assign(n_users + 1, 0);
  std::partial_sum(counts.begin(), counts.end(), offsets_.begin());

  rows_.resize(rows.size());
  std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (const auto& r : rows) rows_[cursor[static_cast<std::size_t>(r.user)]++] = r;

  sorted_offsets_ = offsets_;
  sorted_items_.resize(rows_.size());
  for (std::size_t u = 0; u < n_users; ++u) {
    for (std::size_t k = offsets_[u]; k < offsets_[u + 1]; ++k) sorted_items_[k] = rows_[k].item;
    std::sort(sorted_items_.begin() + static_cast<std::ptrdiff_t>(offsets_[u]),
              sorted_items_.begin() + static_cast<std::ptrdiff_t>(offsets_[u + 1]));
  }
}

std::span<const Interaction> Dataset::user_interactions(int user) const {
  const auto u = static_cast<std::size_t>(user);
  return {rows_.data() + offsets_[u], offsets_[u + 1] - offsets_[u]};
}

std::size_t Dataset::user_degree(int user) const {
  const auto u = static_cast<std::size_t>(user);
  return offsets_[u + 1] - offsets_[u];
}

std::span<const int> Dataset::items_of(int user) const {
  const auto u = static_cast<std::size_t>(user);
  return {sorted_items_.data() + sorted_offsets_[u], sorted_offsets_[u + 1] - sorted_offsets_[u]};
}

bool Dataset::contains(int user, int item) const {
  const auto s = items_of(user);
  return std::binary_search(s.begin(), s.end(), item);
}

ItemCatalog parse_item_catalog(std::istream& in, DatasetFormat format) {
  ItemCatalog catalog;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    std::string id, title;
    switch (format) {
      case DatasetFormat::ml100k: {
        const auto f = split_on(line, '|');
        if (f.size() < 2) throw ParseError("expected '|' separated fields", line_no);
        id = f[0];
        title = f[1];
        break;
      }
      case DatasetFormat::ml1m: {
        const auto f = split_on_str(line, "::");
        if (f.size() < 2) throw ParseError("expected '::' separated fields", line_no);
        id = f[0];
        title = f[1];
        break;
      }
      case DatasetFormat::bookcrossing: {
        const auto f = split_csv_semicolon(line);
        if (f.size() < 2) throw ParseError("expected ';' separated fields", line_no);
        if (line_no == 1 && f[0] == "ISBN") continue;
        id = trim(f[0]);
        title = f[1];
        break;
      }
    }
    title = ensure_utf8(trim(title), catalog.replaced_encoding);
    catalog.titles.emplace(id, title);  // duplicate catalog rows keep the first
  }
  return catalog;
}

ItemCatalog load_item_catalog(const std::filesystem::path& path, DatasetFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open catalog file " + path.string());
  return parse_item_catalog(in, format);
}

Dataset parse_ratings(std::istream& in, DatasetFormat format, const ItemCatalog* catalog,
                      IngestSummary& summary) {
  auto vocab = std::make_shared<Vocab>();
  vocab->scale = scale_for(format);

  std::vector<Interaction> rows;
  std::unordered_map<std::uint64_t, std::size_t> seen;  // (user, item) -> row slot

  std::string line;
  std::size_t line_no = 0;
  RawRow raw;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    if (!parse_row(line, format, line_no, raw)) continue;
    if (raw.rating < vocab->scale.min || raw.rating > vocab->scale.max) {
      throw ParseError("rating " + std::to_string(raw.rating) + " outside scale", line_no);
    }

    auto [uit, u_new] = vocab->user_index.try_emplace(raw.user, vocab->user_count());
    if (u_new) vocab->user_ids.push_back(raw.user);
    auto [iit, i_new] = vocab->item_index.try_emplace(raw.item, vocab->item_count());
    if (i_new) vocab->item_ids.push_back(raw.item);

    const int u = uit->second;
    const int i = iit->second;
    const std::uint64_t key =
        (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) | static_cast<std::uint32_t>(i);
    auto [sit, fresh] = seen.try_emplace(key, rows.size());
    if (fresh) {
      rows.push_back({u, i, raw.rating, raw.timestamp});
    } else {
      rows[sit->second].rating = raw.rating;  // keep the last occurrence
      rows[sit->second].timestamp = raw.timestamp;
      ++summary.duplicates_dropped;
    }
  }

  vocab->item_titles.resize(vocab->item_ids.size());
  for (std::size_t i = 0; i < vocab->item_ids.size(); ++i) {
    const std::string& raw_id = vocab->item_ids[i];
    if (catalog) {
      const auto it = catalog->titles.find(raw_id);
      if (it != catalog->titles.end() && !it->second.empty()) {
        vocab->item_titles[i] = it->second;
        continue;
      }
    }
    vocab->item_titles[i] = "item-" + raw_id;
    ++summary.fallback_titles;
  }

  summary.users = vocab->user_ids.size();
  summary.items = vocab->item_ids.size();
  summary.interactions = rows.size();
  if (catalog) summary.replaced_encoding += catalog->replaced_encoding;

  return Dataset(std::move(vocab), std::move(rows));
}

Dataset load_ratings_file(const std::filesystem::path& path, DatasetFormat format,
                          const ItemCatalog* catalog, IngestSummary& summary) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open ratings file " + path.string());
  return parse_ratings(in, format, catalog, summary);
}

Dataset filter_min_interactions(const Dataset& data, std::size_t min_interactions) {
  const Vocab& old_vocab = data.vocab();
  std::vector<bool> keep_user(static_cast<std::size_t>(data.user_count()), true);
  std::vector<bool> keep_item(static_cast<std::size_t>(data.item_count()), true);

  // Dropping users can empty items; re-check until stable. Items never gate
  // users here (the filter is on user activity), so this converges in two
  // passes, but the loop keeps the invariant obvious.
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<std::size_t> user_deg(keep_user.size(), 0);
    std::vector<std::size_t> item_deg(keep_item.size(), 0);
    for (const auto& r : data.interactions()) {
      if (!keep_user[r.user] || !keep_item[r.item]) continue;
      ++user_deg[r.user];
      ++item_deg[r.item];
    }
    for (std::size_t u = 0; u < keep_user.size(); ++u) {
      if (keep_user[u] && user_deg[u] < min_interactions) {
        keep_user[u] = false;
        changed = true;
      }
    }
    for (std::size_t i = 0; i < keep_item.size(); ++i) {
      if (keep_item[i] && item_deg[i] == 0) {
        keep_item[i] = false;
        changed = true;
      }
    }
  }

  auto vocab = std::make_shared<Vocab>();
  vocab->scale = old_vocab.scale;
  std::vector<int> user_map(keep_user.size(), -1);
  std::vector<int> item_map(keep_item.size(), -1);
  for (std::size_t u = 0; u < keep_user.size(); ++u) {
    if (!keep_user[u]) continue;
    user_map[u] = vocab->user_count();
    vocab->user_index.emplace(old_vocab.user_ids[u], vocab->user_count());
    vocab->user_ids.push_back(old_vocab.user_ids[u]);
  }
  for (std::size_t i = 0; i < keep_item.size(); ++i) {
    if (!keep_item[i]) continue;
    item_map[i] = vocab->item_count();
    vocab->item_index.emplace(old_vocab.item_ids[i], vocab->item_count());
    vocab->item_ids.push_back(old_vocab.item_ids[i]);
    vocab->item_titles.push_back(old_vocab.item_titles[i]);
  }
  if (vocab->user_ids.empty()) {
    throw ParseError("no users survive the min-interactions filter");
  }

  std::vector<Interaction> rows;
  rows.reserve(data.size());
  for (const auto& r : data.interactions()) {
    if (!keep_user[r.user] || !keep_item[r.item]) continue;
    rows.push_back({user_map[r.user], item_map[r.item], r.rating, r.timestamp});
  }
  return Dataset(std::move(vocab), std::move(rows));
}

}  // namespace hybridrank
