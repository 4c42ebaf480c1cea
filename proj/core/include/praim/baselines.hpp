#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace praim {

enum class BaselineKind {
  kMean,
  kZero,
  kLastObserved,
  kInterpolation,
  kKnn,
};

BaselineKind parse_baseline_kind(const std::string& name);
std::string baseline_kind_name(BaselineKind kind);

struct KnnPool {
  // Donor windows, complete (no missing entries), all of the query's length.
  std::vector<std::vector<double>> windows;
  int k = 5;
};

// Fills masked positions of one window; observed positions pass through
// untouched. The KNN donor distance is Euclidean over the query's observed
// positions, scaled by sqrt(L / co-observed count) so partial overlaps
// compare fairly.
std::vector<double> impute_baseline(const std::vector<double>& demand,
                                    const std::vector<std::uint8_t>& mask,
                                    BaselineKind kind,
                                    const KnnPool* pool = nullptr);

}  // namespace praim
