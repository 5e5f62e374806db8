#include "hearthlab/transfer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "hearthlab/errors.hpp"

namespace hearth {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

PolicyParams transplant(const PolicyParams& source, int target_objects,
                        Rng& rng, bool keep_primitive_head) {
  if (target_objects < 1) {
    throw std::invalid_argument("transplant: target needs at least 1 object");
  }
  if (!source.all_finite()) {
    throw NumericError("transplant: source policy has non-finite weights");
  }
  PolicyParams out = source;
  init_actor_heads(out, target_objects, rng, keep_primitive_head);
  return out;
}

double transfer_ratio(std::span<const double> transfer,
                      std::span<const double> baseline, std::size_t episodes,
                      double offset) {
  if (transfer.size() < episodes || baseline.size() < episodes) {
    throw std::invalid_argument("transfer_ratio: curves shorter than " +
                                std::to_string(episodes) + " episodes");
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t e = 0; e < episodes; ++e) {
    if (transfer[e] + offset < 0.0 || baseline[e] + offset < 0.0) {
      throw std::invalid_argument(
          "transfer_ratio: offset leaves a negative episode total");
    }
    num += transfer[e] + offset;
    den += baseline[e] + offset;
  }
  if (den == 0.0) {
    throw std::domain_error("transfer_ratio: baseline area is zero");
  }
  return num / den;
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i + j) / 2.0) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double rank_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("rank_correlation: length mismatch");
  }
  if (x.size() < 3) {
    throw std::invalid_argument("rank_correlation: need at least 3 pairs");
  }
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0.0 || syy == 0.0) return kNaN;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> aggregate_curves(const std::vector<LearningCurve>& runs,
                                     Aggregation how) {
  if (runs.empty()) return {};
  std::size_t len = runs.front().size();
  for (const auto& r : runs) len = std::min(len, r.size());
  if (how == Aggregation::kTop) {
    std::size_t best = 0;
    double best_sum = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const double s = std::accumulate(runs[i].totals.begin(),
                                       runs[i].totals.begin() + len, 0.0);
      if (s > best_sum) {
        best_sum = s;
        best = i;
      }
    }
    return {runs[best].totals.begin(), runs[best].totals.begin() + len};
  }
  std::vector<double> out(len);
  std::vector<double> column(runs.size());
  for (std::size_t e = 0; e < len; ++e) {
    for (std::size_t i = 0; i < runs.size(); ++i) column[i] = runs[i].totals[e];
    std::sort(column.begin(), column.end());
    const std::size_t m = column.size() / 2;
    out[e] = column.size() % 2 ? column[m] : 0.5 * (column[m - 1] + column[m]);
  }
  return out;
}

std::vector<std::string> run_parallel(
    const std::vector<std::function<void()>>& jobs, int workers) {
  std::vector<std::string> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        jobs[i]();
      } catch (const std::exception& e) {
        errors[i] = e.what();
        if (errors[i].empty()) errors[i] = "unknown error";
      }
    }
  };
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(jobs.size())));
  if (n == 1) {
    worker();
    return errors;
  }
  std::vector<std::thread> threads;
  for (int t = 0; t < n; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  return errors;
}

TransferReport run_grid(const std::vector<Activity>& catalog,
                        const std::vector<std::string>& sources,
                        const std::vector<std::string>& targets,
                        const GridConfig& config,
                        EmbeddingProvider& provider) {
  if (sources.empty() || targets.empty()) {
    throw std::invalid_argument("grid needs at least one source and target");
  }
  if (config.seeds < 1) throw std::invalid_argument("seeds must be >= 1");
  if (config.checkpoints.empty()) {
    throw std::invalid_argument("at least one checkpoint is required");
  }
  const RewardParams& rp = config.train.reward;
  if (config.offset < rp.max_steps * std::abs(rp.invalid_penalty)) {
    throw std::invalid_argument(
        "AUC offset must be at least max_steps * |invalid_penalty|");
  }
  for (int cp : config.checkpoints) {
    if (cp < 1 || cp > config.train.episodes) {
      throw std::invalid_argument("checkpoint " + std::to_string(cp) +
                                  " outside [1, episodes]");
    }
  }
  const int horizon =
      *std::max_element(config.checkpoints.begin(), config.checkpoints.end());

  auto resolve = [&](const std::vector<std::string>& names, bool as_target) {
    std::vector<const Activity*> out;
    for (const auto& n : names) {
      const Activity* a = find_activity(catalog, n);
      if (!a) throw LoadError("unknown activity '" + n + "'");
      if (as_target && a->source_only) {
        throw std::invalid_argument("activity '" + a->short_name +
                                    "' is source-only and cannot be a target");
      }
      out.push_back(a);
    }
    return out;
  };
  const auto src = resolve(sources, false);
  const auto tgt = resolve(targets, true);
  const std::size_t ns = src.size(), nt = tgt.size();
  const auto nseeds = static_cast<std::size_t>(config.seeds);
  auto seed_of = [&](std::size_t k) { return config.seed + k; };

  TransferReport report;
  for (const Activity* a : src) report.sources.push_back(a->short_name);
  for (const Activity* a : tgt) report.targets.push_back(a->short_name);

  // Similarity over every activity that appears in the grid.
  Descriptions desc;
  std::vector<const Activity*> members;
  for (const Activity& a : catalog) {
    const bool used =
        std::find(src.begin(), src.end(), &a) != src.end() ||
        std::find(tgt.begin(), tgt.end(), &a) != tgt.end();
    if (used) {
      desc.emplace_back(a.short_name, a.description());
      members.push_back(&a);
    }
  }
  if (desc.size() >= 2) {
    report.similarity = similarity_matrix(desc, provider);
  } else {
    // A single activity is trivially self-similar.
    report.similarity.labels = {desc.front().first};
    report.similarity.values = {1.0};
  }
  report.similarity_st.resize(ns * nt);
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t t = 0; t < nt; ++t) {
      report.similarity_st[s * nt + t] =
          report.similarity.at(report.similarity.index_of(src[s]->short_name),
                               report.similarity.index_of(tgt[t]->short_name));
    }
  }

  auto log = [&](const std::string& msg) {
    static std::mutex mu;
    if (config.quiet) return;
    std::lock_guard<std::mutex> lock(mu);
    std::cerr << msg << "\n";
  };

  // Phase 1: source pretraining and scratch baselines.
  std::vector<std::vector<TrainResult>> pre(ns, std::vector<TrainResult>(nseeds));
  std::vector<std::vector<LearningCurve>> base(
      nt, std::vector<LearningCurve>(nseeds));
  TrainConfig base_cfg = config.train;
  base_cfg.episodes = horizon;

  std::vector<std::function<void()>> jobs;
  std::vector<std::string> labels;
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t k = 0; k < nseeds; ++k) {
      jobs.push_back([&, s, k] {
        pre[s][k] = train(*src[s], config.train, seed_of(k));
        log("pretrained " + src[s]->short_name + " seed " +
            std::to_string(seed_of(k)));
      });
      labels.push_back("pretrain source=" + src[s]->short_name +
                       " seed=" + std::to_string(seed_of(k)));
    }
  }
  for (std::size_t t = 0; t < nt; ++t) {
    for (std::size_t k = 0; k < nseeds; ++k) {
      jobs.push_back([&, t, k] {
        base[t][k] = train(*tgt[t], base_cfg, seed_of(k)).curve;
        log("baseline " + tgt[t]->short_name + " seed " +
            std::to_string(seed_of(k)));
      });
      labels.push_back("baseline target=" + tgt[t]->short_name +
                       " seed=" + std::to_string(seed_of(k)));
    }
  }
  auto errors = run_parallel(jobs, config.jobs);
  std::vector<bool> source_ok(ns, true), target_ok(nt, true);
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (errors[i].empty()) continue;
    report.failures.push_back(labels[i] + ": " + errors[i]);
    if (i < ns * nseeds) {
      source_ok[i / nseeds] = false;
    } else {
      target_ok[(i - ns * nseeds) / nseeds] = false;
    }
  }

  // Best pretraining seed per source by final-window mean.
  std::vector<std::size_t> best(ns, 0);
  for (std::size_t s = 0; s < ns; ++s) {
    if (!source_ok[s]) continue;
    for (std::size_t k = 1; k < nseeds; ++k) {
      if (pre[s][k].curve.final_mean() > pre[s][best[s]].curve.final_mean()) {
        best[s] = k;
      }
    }
  }

  // Phase 2: transplanted training.
  std::vector<std::vector<std::vector<LearningCurve>>> xfer(
      ns, std::vector<std::vector<LearningCurve>>(
              nt, std::vector<LearningCurve>(nseeds)));
  std::vector<std::vector<bool>> cell_ok(ns, std::vector<bool>(nt, false));
  jobs.clear();
  labels.clear();
  std::vector<std::pair<std::size_t, std::size_t>> job_cell;
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t t = 0; t < nt; ++t) {
      if (!source_ok[s] || !target_ok[t]) continue;
      cell_ok[s][t] = true;
      if (src[s] == tgt[t]) {
        if (!config.self_sanity) cell_ok[s][t] = false;
        continue;  // sanity cells reuse the baseline
      }
      for (std::size_t k = 0; k < nseeds; ++k) {
        jobs.push_back([&, s, t, k] {
          Rng rng(stream_seed(seed_of(k), SeedStream::kTransplant));
          PolicyParams init =
              transplant(pre[s][best[s]].params, tgt[t]->scene.size(), rng,
                         config.keep_primitive_head);
          xfer[s][t][k] = train(*tgt[t], base_cfg, seed_of(k), init).curve;
          log("transfer " + src[s]->short_name + " -> " +
              tgt[t]->short_name + " seed " + std::to_string(seed_of(k)));
        });
        labels.push_back("transfer source=" + src[s]->short_name +
                         " target=" + tgt[t]->short_name +
                         " seed=" + std::to_string(seed_of(k)));
        job_cell.emplace_back(s, t);
      }
    }
  }
  errors = run_parallel(jobs, config.jobs);
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (errors[i].empty()) continue;
    report.failures.push_back(labels[i] + ": " + errors[i]);
    cell_ok[job_cell[i].first][job_cell[i].second] = false;
  }

  // Ratio matrices.
  std::vector<std::vector<double>> base_agg(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    if (target_ok[t]) base_agg[t] = aggregate_curves(base[t], config.aggregation);
  }
  for (int cp : config.checkpoints) {
    RatioMatrix m;
    m.checkpoint = cp;
    m.values.assign(ns * nt, kNaN);
    for (std::size_t s = 0; s < ns; ++s) {
      for (std::size_t t = 0; t < nt; ++t) {
        if (!cell_ok[s][t]) continue;
        const std::vector<double> agg =
            src[s] == tgt[t] ? base_agg[t]
                             : aggregate_curves(xfer[s][t], config.aggregation);
        m.values[s * nt + t] =
            transfer_ratio(agg, base_agg[t], static_cast<std::size_t>(cp),
                           config.offset);
      }
    }
    report.ratios.push_back(std::move(m));
  }

  // Per-target rank correlation between similarity and ratio.
  for (std::size_t t = 0; t < nt; ++t) {
    TargetCorrelation tc;
    tc.target = tgt[t]->short_name;
    for (std::size_t c = 0; c < report.ratios.size(); ++c) {
      std::vector<double> sim, ratio;
      for (std::size_t s = 0; s < ns; ++s) {
        const double r = report.ratio(c, s, t);
        if (src[s] == tgt[t] || std::isnan(r)) continue;
        sim.push_back(report.sim(s, t));
        ratio.push_back(r);
      }
      tc.n_sources = static_cast<int>(sim.size());
      tc.rho.push_back(sim.size() >= 3 ? rank_correlation(sim, ratio) : kNaN);
    }
    report.correlations.push_back(std::move(tc));
  }

  // Raw curves, in a fixed order.
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t k = 0; k < nseeds; ++k) {
      if (!source_ok[s]) continue;
      report.curves.push_back({src[s]->short_name + "__pretrain__seed" +
                                   std::to_string(seed_of(k)),
                               pre[s][k].curve});
    }
  }
  for (std::size_t t = 0; t < nt; ++t) {
    for (std::size_t k = 0; k < nseeds; ++k) {
      if (!target_ok[t]) continue;
      report.curves.push_back({tgt[t]->short_name + "__from__scratch__seed" +
                                   std::to_string(seed_of(k)),
                               base[t][k]});
    }
  }
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t t = 0; t < nt; ++t) {
      if (!cell_ok[s][t] || src[s] == tgt[t]) continue;
      for (std::size_t k = 0; k < nseeds; ++k) {
        report.curves.push_back({tgt[t]->short_name + "__from__" +
                                     src[s]->short_name + "__seed" +
                                     std::to_string(seed_of(k)),
                                 xfer[s][t][k]});
      }
    }
  }
  return report;
}

}  // namespace hearth
