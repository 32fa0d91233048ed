#pragma once

#include <vector>

namespace mapfast {

// Pair order is (0,1), (0,2), ..., (1,2), ...; bit p is "i faster than j".
inline int pair_count(int k) { return k * (k - 1) / 2; }

inline int pair_index(int i, int j, int k) { return i * k - i * (i + 1) / 2 + (j - i - 1); }

struct TrainingLabel {
  int fastest_class = 0;
  std::vector<bool> completion;
  std::vector<bool> pairwise;
  // False for pairs where neither algorithm finished; such bits carry no loss.
  std::vector<bool> pairwise_valid;

  friend bool operator==(const TrainingLabel&, const TrainingLabel&) = default;
};

}  // namespace mapfast
