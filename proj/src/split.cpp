#include "hybridrank/split.hpp"

#include <cmath>
#include <vector>

#include "hybridrank/rng.hpp"

namespace hybridrank {

SplitDataset split_per_user(const Dataset& data, const std::array<double, 3>& ratios,
                            std::uint64_t seed) {
  double sum = 0.0;
  for (const double r : ratios) {
    if (r < 0.0) throw ParseError("split ratios must be non-negative");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ParseError("split ratios must sum to 1");

  std::vector<Interaction> train_rows, valid_rows, test_rows;
  train_rows.reserve(data.size());

  for (int u = 0; u < data.user_count(); ++u) {
    const auto span = data.user_interactions(u);
    std::vector<Interaction> rows(span.begin(), span.end());
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(u)));
    rng.shuffle(rows);

    const std::size_t n = rows.size();
    std::size_t n_valid = static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratios[1]));
    std::size_t n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratios[2]));
    std::size_t n_train = n - n_valid - n_test;
    if (n_train == 0 && n > 0) {
      if (n_valid > 0) {
        --n_valid;
      } else {
        --n_test;
      }
      ++n_train;
    }

    for (std::size_t k = 0; k < n; ++k) {
      if (k < n_train) {
        train_rows.push_back(rows[k]);
      } else if (k < n_train + n_valid) {
        valid_rows.push_back(rows[k]);
      } else {
        test_rows.push_back(rows[k]);
      }
    }
  }

  SplitDataset out;
  out.ratios = ratios;
  out.seed = seed;
  out.train = Dataset(data.vocab_ptr(), std::move(train_rows));
  out.validation = Dataset(data.vocab_ptr(), std::move(valid_rows));
  out.test = Dataset(data.vocab_ptr(), std::move(test_rows));
  return out;
}

}  // namespace hybridrank
