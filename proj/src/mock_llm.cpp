#include "hybridrank/mock_llm.hpp"

#include <algorithm>
#include <sstream>

#include "hybridrank/errors.hpp"
#include "hybridrank/rng.hpp"

namespace hybridrank {

MockKind mock_kind_from_string(const std::string& name) {
  if (name == "oracle") return MockKind::oracle;
  if (name == "noisy_oracle") return MockKind::noisy_oracle;
  if (name == "echo") return MockKind::echo;
  if (name == "hallucinating") return MockKind::hallucinating;
  throw ParseError("unknown mock kind '" + name + "'");
}

std::string to_string(MockKind kind) {
  switch (kind) {
    case MockKind::oracle: return "oracle";
    case MockKind::noisy_oracle: return "noisy_oracle";
    case MockKind::echo: return "echo";
    case MockKind::hallucinating: return "hallucinating";
  }
  return "?";
}

namespace {

std::vector<std::size_t> oracle_order(const Instruction& ins,
                                      const std::unordered_map<int, double>& truth) {
  std::vector<std::size_t> order(ins.candidates.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ra = truth.find(ins.candidates[a]);
    const auto rb = truth.find(ins.candidates[b]);
    const double va = ra == truth.end() ? -1e300 : ra->second;
    const double vb = rb == truth.end() ? -1e300 : rb->second;
    if (va != vb) return va > vb;
    return ins.candidates[a] < ins.candidates[b];
  });
  return order;
}

std::string render_list(const std::vector<std::string>& titles) {
  std::ostringstream out;
  for (std::size_t k = 0; k < titles.size(); ++k) {
    out << k + 1 << ". " << titles[k] << '\n';
  }
  return out.str();
}

}  // namespace

std::string mock_complete(const MockLlm& mock, const Instruction& ins,
                          const std::unordered_map<int, double>& truth) {
  Rng rng(mix_seed(mock.seed, static_cast<std::uint64_t>(ins.user)));

  std::vector<std::size_t> order;
  switch (mock.kind) {
    case MockKind::echo:
      order.resize(ins.candidates.size());
      for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
      break;
    case MockKind::oracle:
    case MockKind::hallucinating:
      order = oracle_order(ins, truth);
      break;
    case MockKind::noisy_oracle: {
      order = oracle_order(ins, truth);
      for (std::size_t k = 0; k + 1 < order.size(); ++k) {
        if (rng.bernoulli(mock.noise_p)) std::swap(order[k], order[k + 1]);
      }
      break;
    }
  }

  std::vector<std::string> titles;
  titles.reserve(order.size());
  for (const std::size_t k : order) titles.push_back(ins.candidate_titles[k]);

  if (mock.kind == MockKind::hallucinating) {
    for (int h = 0; h < mock.hallucination_count; ++h) {
      const std::size_t slot = rng.uniform(titles.size() + 1);
      titles.insert(titles.begin() + static_cast<std::ptrdiff_t>(slot),
                    "The Imaginary Chronicle Vol. " + std::to_string(h + 1) + " (2099)");
    }
  }
  return render_list(titles);
}

}  // namespace hybridrank
