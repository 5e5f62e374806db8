// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>

#include "hearthlab/activity.hpp"
#include "hearthlab/embed.hpp"
#include "hearthlab/episode.hpp"
#include "hearthlab/render.hpp"
#include "hearthlab/report.hpp"
#include "hearthlab/train.hpp"
#include "hearthlab/transfer.hpp"
#include "support.hpp"

using namespace hearth;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::vector<Activity> catalog() {
  return load_catalog(testing_support::source_path("catalog"));
}

std::string num(double v, int digits = 3) { return format_fixed(v, digits); }

Outcome reward_bounds() {
  const auto acts = catalog();
  Rng env_rng(101), choice(202);
  double lo = 1e9, hi = -1e9;
  int bad = 0;
  const int episodes = 10000;
  for (int e = 0; e < episodes; ++e) {
    const Activity& act = acts[e % acts.size()];
    const ObjectIndex n = act.scene.size();
    const EpisodeResult r = run_episode(
        act,
        [&](const WorldState&) {
          return Action{static_cast<Primitive>(choice.below(kNumPrimitives)),
                        static_cast<ObjectIndex>(choice.below(n))};
        },
        RewardParams{}, env_rng);
    lo = std::min(lo, r.total);
    hi = std::max(hi, r.total);
    if (r.total < -64.0 || r.total > 200.0) ++bad;
  }
  return {bad == 0, std::to_string(episodes) + " episodes, totals in [" + num(lo) + ", " +
                        num(hi) + "]"};
}

Outcome grounding_counts() {
  const auto acts = catalog();
  const std::size_t cupboard = find_activity(acts, "cupboard")->grounded.groundings.size();
  const std::size_t window = find_activity(acts, "window")->grounded.groundings.size();
  return {cupboard == 2 && window == 1, "cupboard " + std::to_string(cupboard) +
                                            ", window " + std::to_string(window)};
}

Outcome gradient_check() {
  Rng rng(303);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const int f = 8 + static_cast<int>(rng.below(17));
    const int h = 4 + static_cast<int>(rng.below(9));
    const int k = 1 + static_cast<int>(rng.below(6));
    auto gp = testing_support::random_grad_problem(rng, f, h, k, 6, i % 2 == 1);
    worst = std::max(worst, testing_support::ppo_gradient_error(gp, 1e-5));
  }
  return {worst < 1e-4, "20 networks, max relative error " + format_shortest(worst)};
}

Outcome learnability() {
  const auto acts = catalog();
  bool ok = true;
  std::string detail;
  for (const char* name : {"window", "microwave"}) {
    Activity act = *find_activity(acts, name);
    // deterministic except grasp
    for (int p = 0; p < kNumPrimitives; ++p) {
      if (static_cast<Primitive>(p) != Primitive::kGrasp) act.action_model.success_prob[p] = 1.0;
    }
    TrainConfig cfg;
    cfg.episodes = 512;
    double best = -1e9;
    std::string means;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const double m = train(act, cfg, seed).curve.final_mean(64);
      best = std::max(best, m);
      means += (seed ? "/" : "") + num(m, 1);
    }
    ok = ok && best >= 150.0;
    detail += std::string(detail.empty() ? "" : "; ") + name + " final-64 means " + means;
  }
  return {ok, detail};
}

bool bit_equal(std::span<const double> a, std::span<const double> b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

Outcome transplant_check() {
  Rng rng(404);
  const PolicyParams src = init_params(512, 128, 9, rng);
  Rng head_rng(405);
  const PolicyParams dst = transplant(src, 5, head_rng);
  int mismatches = 0;
  for (int i = 0; i < 100; ++i) {
    std::vector<double> x(512);
    for (double& v : x) v = rng.uniform() < 0.9 ? 0.0 : rng.normal();
    const ForwardPass a = forward(src, x);
    const ForwardPass b = forward(dst, x);
    if (!bit_equal(a.h2, b.h2) || !bit_equal({&a.value, 1}, {&b.value, 1})) ++mismatches;
  }
  const bool fresh = dst.prim_head != src.prim_head && dst.obj_head.out == 5;
  return {mismatches == 0 && fresh,
          "100 vectors, " + std::to_string(mismatches) + " trunk/value mismatches, heads " +
              (fresh ? "fresh" : "NOT fresh")};
}

Outcome ratio_algebra() {
  Rng rng(505);
  std::vector<double> base(160), doubled(160);
  for (std::size_t e = 0; e < base.size(); ++e) {
    base[e] = -64.0 + rng.uniform() * 264.0;
    doubled[e] = 2.0 * (base[e] + 64.0) - 64.0;
  }
  const double same = transfer_ratio(base, base, 160, 64.0);
  const double twice = transfer_ratio(doubled, base, 160, 64.0);
  const bool ok = std::abs(same - 1.0) <= 1e-9 && std::abs(twice - 2.0) <= 1e-9;
  return {ok, "identical " + num(same) + ", doubled " + num(twice)};
}

Outcome similarity_properties() {
  const auto acts = catalog();
  Descriptions desc;
  for (const Activity& a : acts) desc.emplace_back(a.short_name, a.description());
  HashedProvider provider(256);
  const SimilarityMatrix m = similarity_matrix(desc, provider);
  double asym = 0.0, diag = 0.0, order = 0.0;
  bool in_range = true;
  for (std::size_t i = 0; i < m.size(); ++i) {
    diag = std::max(diag, std::abs(m.at(i, i) - 1.0));
    for (std::size_t j = 0; j < m.size(); ++j) {
      asym = std::max(asym, std::abs(m.at(i, j) - m.at(j, i)));
      in_range = in_range && m.at(i, j) >= -1.0 && m.at(i, j) <= 1.0;
    }
  }
  Descriptions shuffled = desc;
  std::reverse(shuffled.begin(), shuffled.end());
  std::rotate(shuffled.begin(), shuffled.begin() + 3, shuffled.end());
  const SimilarityMatrix s = similarity_matrix(shuffled, provider);
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m.size(); ++j) {
      order = std::max(order, std::abs(m.at(i, j) - s.at(s.index_of(m.labels[i]),
                                                         s.index_of(m.labels[j]))));
    }
  }
  const bool ok = asym <= 1e-12 && diag <= 1e-12 && in_range && order <= 1e-12;
  return {ok, "max asymmetry " + format_shortest(asym) + ", diagonal error " +
                  format_shortest(diag) + ", reorder drift " + format_shortest(order)};
}

std::vector<fs::path> csv_files(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".csv") {
      out.push_back(fs::relative(e.path(), dir));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

GridConfig desk_grid(int episodes, std::vector<int> checkpoints) {
  GridConfig g;
  g.train.episodes = episodes;
  g.checkpoints = std::move(checkpoints);
  g.seeds = 1;
  g.seed = 0;
  g.jobs = 1;
  return g;
}

Outcome determinism(const fs::path& work) {
  const auto acts = catalog();
  HashedProvider provider(256);
  const GridConfig g = desk_grid(80, {80});
  for (const char* run : {"a", "b"}) {
    const TransferReport r =
        run_grid(acts, {"window", "microwave"}, {"food", "dishes"}, g, provider);
    write_report(r, (work / run).string());
  }
  const auto files_a = csv_files(work / "a");
  const auto files_b = csv_files(work / "b");
  int differ = 0;
  for (const auto& f : files_a) {
    if (read_text_file((work / "a" / f).string()) != read_text_file((work / "b" / f).string())) {
      ++differ;
    }
  }
  const bool ok = files_a == files_b && !files_a.empty() && differ == 0;
  return {ok, std::to_string(files_a.size()) + " CSV files, " + std::to_string(differ) +
                  " differ"};
}

Outcome golden_renders() {
  int mismatched = 0;
  const auto acts = catalog();
  for (const Activity& a : acts) {
    const std::string base = testing_support::source_path("tests/fixtures/render/" + a.name);
    if (render_state(a.initial, a.scene) + "\n" != read_text_file(base + ".state.txt")) ++mismatched;
    if (render_goal(a.goal) + "\n" != read_text_file(base + ".goal.txt")) ++mismatched;
  }
  const std::string goal = render_goal(find_activity(acts, "cupboard")->goal);
  const bool phrases = goal.find("For every cabinet,") != std::string::npos &&
                       goal.find("the following is NOT true:") != std::string::npos;
  return {acts.size() == 7 && mismatched == 0 && phrases,
          std::to_string(acts.size()) + " activities, " + std::to_string(mismatched) +
              " mismatched files, cupboard phrases " + (phrases ? "present" : "missing")};
}

Outcome forgetting_report(const fs::path& work) {
  const auto acts = catalog();
  HashedProvider provider(256);
  const TransferReport r = run_grid(acts, {"window", "microwave"}, {"food", "dishes"},
                                    desk_grid(160, {80, 160}), provider);
  write_report(r, work.string());
  bool ok = fs::exists(work / "matrix_ratio_ep80.csv") &&
            fs::exists(work / "matrix_ratio_ep160.csv") && fs::exists(work / "forgetting.csv");
  std::string table;
  if (ok) {
    const CsvTable t = parse_csv(read_text_file((work / "forgetting.csv").string()));
    ok = t.rows.size() == 2 && t.header.size() == 5;
    for (const auto& row : t.rows) {
      table += " " + row[0] + " " + row[1] + "->" + row[2];
    }
  }
  return {ok && r.failures.empty(), "mean ratio ep80->ep160:" + table};
}

}  // namespace

int main() {
  const fs::path work = fs::temp_directory_path() / "hearthlab_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"reward bounds", reward_bounds},
      {"grounding counts", grounding_counts},
      {"gradient check", gradient_check},
      {"learnability of easy tasks", learnability},
      {"transplant correctness", transplant_check},
      {"transfer ratio algebra", ratio_algebra},
      {"similarity matrix properties", similarity_properties},
      {"grid determinism", [&] { return determinism(work / "determinism"); }},
      {"golden renders", golden_renders},
      {"forgetting observability", [&] { return forgetting_report(work / "forgetting"); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += o.pass ? 0 : 1;
    std::cout << "criterion " << i + 1 << " " << (o.pass ? "PASS" : "FAIL") << " "
              << criteria[i].first << ": " << o.detail << " [" << num(secs, 1) << "s]"
              << std::endl;
  }
  fs::remove_all(work);
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : "all criteria passed")
            << std::endl;
  return failed ? 1 : 0;
}
