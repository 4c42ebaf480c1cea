#include "praim/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "praim/common.hpp"

namespace praim {

BaselineKind parse_baseline_kind(const std::string& name) {
  if (name == "mean") return BaselineKind::kMean;
  if (name == "zero") return BaselineKind::kZero;
  if (name == "locf") return BaselineKind::kLastObserved;
  if (name == "interp") return BaselineKind::kInterpolation;
  if (name == "knn") return BaselineKind::kKnn;
  throw ValidationError("unknown baseline kind '" + name + "'");
}

std::string baseline_kind_name(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kMean: return "mean";
    case BaselineKind::kZero: return "zero";
    case BaselineKind::kLastObserved: return "locf";
    case BaselineKind::kInterpolation: return "interp";
    case BaselineKind::kKnn: return "knn";
  }
  throw ValidationError("unknown baseline kind");
}

namespace {

std::vector<std::size_t> observed_positions(
    const std::vector<std::uint8_t>& mask) {
  std::vector<std::size_t> obs;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) obs.push_back(i);
  }
  return obs;
}

std::vector<double> knn_fill(const std::vector<double>& demand,
                             const std::vector<std::uint8_t>& mask,
                             const KnnPool& pool) {
  if (pool.k < 1) throw ValidationError("knn baseline needs k >= 1");
  if (pool.windows.empty()) {
    throw ValidationError("knn baseline needs a non-empty donor pool");
  }
  const std::size_t L = demand.size();
  const auto obs = observed_positions(mask);

  struct Donor {
    double distance;
    std::size_t index;
  };
  std::vector<Donor> ranked;
  for (std::size_t d = 0; d < pool.windows.size(); ++d) {
    const auto& w = pool.windows[d];
    if (w.size() != L) {
      throw ValidationError("knn donor window length mismatch");
    }
    double ss = 0.0;
    for (const std::size_t p : obs) {
      const double diff = demand[p] - w[p];
      ss += diff * diff;
    }
    // Donors are complete, so the co-observed set is the query's observed set.
    const double scale = obs.empty()
                             ? 1.0
                             : std::sqrt(static_cast<double>(L) /
                                         static_cast<double>(obs.size()));
    ranked.push_back({scale * std::sqrt(ss), d});
  }
  std::sort(ranked.begin(), ranked.end(), [](const Donor& a, const Donor& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.index < b.index;
  });
  const std::size_t take =
      std::min<std::size_t>(static_cast<std::size_t>(pool.k), ranked.size());

  std::vector<double> out = demand;
  for (std::size_t p = 0; p < L; ++p) {
    if (!mask[p]) continue;
    double sum = 0.0;
    for (std::size_t j = 0; j < take; ++j) {
      sum += pool.windows[ranked[j].index][p];
    }
    out[p] = sum / static_cast<double>(take);
  }
  return out;
}

}  // namespace

std::vector<double> impute_baseline(const std::vector<double>& demand,
                                    const std::vector<std::uint8_t>& mask,
                                    BaselineKind kind, const KnnPool* pool) {
  if (demand.size() != mask.size() || demand.empty()) {
    throw ValidationError("baseline window and mask lengths differ");
  }
  const auto obs = observed_positions(mask);
  if (obs.empty() && kind != BaselineKind::kZero) {
    throw ValidationError("baseline '" + baseline_kind_name(kind) +
                          "' needs at least one observed entry");
  }

  std::vector<double> out = demand;
  switch (kind) {
    case BaselineKind::kZero: {
      for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i]) out[i] = 0.0;
      }
      return out;
    }
    case BaselineKind::kMean: {
      double mean = 0.0;
      for (const std::size_t p : obs) mean += demand[p];
      mean /= static_cast<double>(obs.size());
      for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i]) out[i] = mean;
      }
      return out;
    }
    case BaselineKind::kLastObserved: {
      // Leading gaps backfill from the first observed value.
      double carry = demand[obs.front()];
      for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i]) {
          out[i] = carry;
        } else {
          carry = demand[i];
        }
      }
      return out;
    }
    case BaselineKind::kInterpolation: {
      for (std::size_t i = 0; i < mask.size(); ++i) {
        if (!mask[i]) continue;
        const auto right =
            std::lower_bound(obs.begin(), obs.end(), i);
        if (right == obs.begin()) {
          out[i] = demand[obs.front()];  // constant extrapolation left
        } else if (right == obs.end()) {
          out[i] = demand[obs.back()];  // constant extrapolation right
        } else {
          const std::size_t hi = *right;
          const std::size_t lo = *(right - 1);
          const double t = static_cast<double>(i - lo) /
                           static_cast<double>(hi - lo);
          out[i] = demand[lo] + t * (demand[hi] - demand[lo]);
        }
      }
      return out;
    }
    case BaselineKind::kKnn: {
      if (!pool) throw ValidationError("knn baseline needs a donor pool");
      return knn_fill(demand, mask, *pool);
    }
  }
  throw ValidationError("unknown baseline kind");
}

}  // namespace praim
