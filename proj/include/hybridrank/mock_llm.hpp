#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>

#include "hybridrank/instruction.hpp"

namespace hybridrank {

// Deterministic stand-ins for a remote ranking backend. oracle sorts the
// candidates by held-out rating (best first; ties toward the lower item
// index) and is the upper bound a perfect backend could reach. noisy_oracle
// degrades it with seeded adjacent swaps. echo returns the candidates in the
// order they were asked. hallucinating is the oracle with invented titles
// spliced in, exercising the parser.
enum class MockKind { oracle, noisy_oracle, echo, hallucinating };

MockKind mock_kind_from_string(const std::string& name);
std::string to_string(MockKind kind);

struct MockLlm {
  MockKind kind = MockKind::oracle;
  double noise_p = 0.1;          // per-adjacent-pair swap probability
  int hallucination_count = 2;   // invented titles per response
  std::uint64_t seed = 0;
};

// truth maps a candidate item to its held-out rating; candidates absent from
// the map rank below every rated one. Returns numbered-list text, one title
// per line, like a cooperative backend would.
std::string mock_complete(const MockLlm& mock, const Instruction& instruction,
                          const std::unordered_map<int, double>& truth);

}  // namespace hybridrank
