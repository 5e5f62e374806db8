#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hearthlab/activity.hpp"
#include "hearthlab/embed.hpp"
#include "hearthlab/network.hpp"
#include "hearthlab/rng.hpp"
#include "hearthlab/train.hpp"

namespace hearth {

// Copies trunk and value head bit for bit; re-initializes the actor heads,
// resizing the object head to `target_objects`.
PolicyParams transplant(const PolicyParams& source, int target_objects,
                        Rng& rng, bool keep_primitive_head = false);

// Area under the offset transfer curve over the first n episodes divided by
// the same area under the baseline. Throws when the baseline area is zero.
double transfer_ratio(std::span<const double> transfer,
                      std::span<const double> baseline, std::size_t episodes,
                      double offset);

// Spearman rho with average ranks for ties; NaN when either column is
// constant.
double rank_correlation(std::span<const double> x, std::span<const double> y);

// Average ranks (1-based), ties share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

enum class Aggregation { kMedian, kTop };

struct GridConfig {
  TrainConfig train;  // episodes = source pretraining length
  std::vector<int> checkpoints{80, 160};
  int seeds = 3;
  std::uint64_t seed = 0;
  double offset = 64.0;
  int jobs = 1;
  bool keep_primitive_head = false;
  bool self_sanity = false;  // fill source == target cells with scratch/scratch
  Aggregation aggregation = Aggregation::kMedian;
  bool quiet = true;
};

struct NamedCurve {
  std::string stem;  // file name without extension
  LearningCurve curve;
};

struct RatioMatrix {
  int checkpoint = 0;
  std::vector<double> values;  // sources x targets, NaN where not computed
};

struct TargetCorrelation {
  std::string target;
  int n_sources = 0;
  std::vector<double> rho;  // one per checkpoint
};

struct TransferReport {
  std::vector<std::string> sources;
  std::vector<std::string> targets;
  SimilarityMatrix similarity;     // all activities in the grid
  std::vector<double> similarity_st;  // sources x targets slice
  std::vector<RatioMatrix> ratios;
  std::vector<TargetCorrelation> correlations;
  std::vector<NamedCurve> curves;
  std::vector<std::string> failures;

  double sim(std::size_t s, std::size_t t) const {
    return similarity_st[s * targets.size() + t];
  }
  double ratio(std::size_t cp, std::size_t s, std::size_t t) const {
    return ratios[cp].values[s * targets.size() + t];
  }
};

// Median (or best-seed) curve across seeds, truncated to the shortest.
std::vector<double> aggregate_curves(const std::vector<LearningCurve>& runs,
                                     Aggregation how);

// Runs every (source, target, seed) cell. Cell failures are recorded in
// `failures` and leave NaN ratios; configuration errors throw.
TransferReport run_grid(const std::vector<Activity>& catalog,
                        const std::vector<std::string>& sources,
                        const std::vector<std::string>& targets,
                        const GridConfig& config,
                        EmbeddingProvider& provider);

// Runs jobs on `workers` threads; job i's exception message lands in
// errors[i] (empty on success).
std::vector<std::string> run_parallel(
    const std::vector<std::function<void()>>& jobs, int workers);

}  // namespace hearth
