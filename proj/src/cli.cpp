#include "hearthlab/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "hearthlab/errors.hpp"
#include "hearthlab/render.hpp"
#include "hearthlab/report.hpp"

namespace hearth {

using nlohmann::json;

EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    const char* v = std::getenv(name.c_str());
    if (v == nullptr) return std::nullopt;
    return std::string(v);
  };
}

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t pos = std::min(s.find(',', start), s.size());
    std::string item = s.substr(start, pos - start);
    if (!item.empty()) out.push_back(item);
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_value(const std::string& text, const std::string& what) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw UsageError(what + ": cannot parse '" + text + "'");
  }
  return value;
}

bool parse_bool(const std::string& text, const std::string& what) {
  if (text == "1" || text == "true" || text == "yes" || text == "on") {
    return true;
  }
  if (text == "0" || text == "false" || text == "no" || text == "off" ||
      text.empty()) {
    return false;
  }
  throw UsageError(what + ": expected a boolean, got '" + text + "'");
}

std::vector<int> parse_checkpoints(const std::string& text,
                                   const std::string& what) {
  std::vector<int> out;
  for (const auto& item : split_list(text)) {
    out.push_back(parse_value<int>(item, what));
  }
  return out;
}

Aggregation parse_aggregation(const std::string& text) {
  if (text == "median") return Aggregation::kMedian;
  if (text == "top") return Aggregation::kTop;
  throw UsageError("aggregation must be 'median' or 'top', got '" + text +
                   "'");
}

template <typename T>
void take(const json& j, const char* key, T& dst, const std::string& origin) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw UsageError(origin + ": bad value for '" + key + "'");
  }
}

}  // namespace

void apply_config_json(RunConfig& cfg, const std::string& json_text,
                       const std::string& origin) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw UsageError(origin + ": " + e.what());
  }
  if (!j.is_object()) throw UsageError(origin + ": expected a JSON object");
  static const std::vector<std::string> known{
      "episodes",     "max_steps",     "c",
      "invalid_penalty", "seeds",      "seed",
      "jobs",         "out",           "feature_dim",
      "hidden_dim",   "checkpoints",   "embedding_provider",
      "embedding_dim", "offset",       "mask_invalid",
      "keep_primitive_head", "self_sanity", "aggregation",
      "ppo"};
  for (const auto& item : j.items()) {
    if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
      throw UsageError(origin + ": unknown key '" + item.key() + "'");
    }
  }
  take(j, "episodes", cfg.train.episodes, origin);
  take(j, "max_steps", cfg.train.reward.max_steps, origin);
  take(j, "c", cfg.train.reward.c, origin);
  take(j, "invalid_penalty", cfg.train.reward.invalid_penalty, origin);
  take(j, "seeds", cfg.seeds, origin);
  take(j, "seed", cfg.seed, origin);
  take(j, "jobs", cfg.jobs, origin);
  take(j, "out", cfg.out, origin);
  take(j, "feature_dim", cfg.train.feature_dim, origin);
  take(j, "hidden_dim", cfg.train.hidden_dim, origin);
  take(j, "checkpoints", cfg.checkpoints, origin);
  take(j, "embedding_provider", cfg.embedding_provider, origin);
  take(j, "embedding_dim", cfg.embedding_dim, origin);
  take(j, "offset", cfg.offset, origin);
  take(j, "mask_invalid", cfg.train.mask_invalid, origin);
  take(j, "keep_primitive_head", cfg.keep_primitive_head, origin);
  take(j, "self_sanity", cfg.self_sanity, origin);
  if (j.contains("aggregation")) {
    std::string agg;
    take(j, "aggregation", agg, origin);
    cfg.aggregation = parse_aggregation(agg);
  }
  if (j.contains("ppo")) {
    const json& p = j["ppo"];
    if (!p.is_object()) throw UsageError(origin + ": 'ppo' must be an object");
    PpoHyper& h = cfg.train.ppo;
    take(p, "gamma", h.gamma, origin);
    take(p, "gae_lambda", h.gae_lambda, origin);
    take(p, "clip", h.clip, origin);
    take(p, "epochs", h.epochs, origin);
    take(p, "minibatch", h.minibatch, origin);
    take(p, "learning_rate", h.learning_rate, origin);
    take(p, "value_coef", h.value_coef, origin);
    take(p, "entropy_coef", h.entropy_coef, origin);
    take(p, "max_grad_norm", h.max_grad_norm, origin);
    take(p, "adam_eps", h.adam_eps, origin);
    take(p, "rollout_steps", h.rollout_steps, origin);
    take(p, "normalize_advantage", h.normalize_advantage, origin);
  }
}

void apply_env(RunConfig& cfg, const EnvLookup& env) {
  auto get = [&](const char* name) { return env(std::string(name)); };
  if (auto v = get("HEARTHLAB_EPISODES")) {
    cfg.train.episodes = parse_value<int>(*v, "HEARTHLAB_EPISODES");
  }
  if (auto v = get("HEARTHLAB_MAX_STEPS")) {
    cfg.train.reward.max_steps = parse_value<int>(*v, "HEARTHLAB_MAX_STEPS");
  }
  if (auto v = get("HEARTHLAB_SEEDS")) {
    cfg.seeds = parse_value<int>(*v, "HEARTHLAB_SEEDS");
  }
  if (auto v = get("HEARTHLAB_SEED")) {
    cfg.seed = parse_value<std::uint64_t>(*v, "HEARTHLAB_SEED");
  }
  if (auto v = get("HEARTHLAB_JOBS")) {
    cfg.jobs = parse_value<int>(*v, "HEARTHLAB_JOBS");
  }
  if (auto v = get("HEARTHLAB_OUT")) cfg.out = *v;
  if (auto v = get("HEARTHLAB_FEATURE_DIM")) {
    cfg.train.feature_dim = parse_value<int>(*v, "HEARTHLAB_FEATURE_DIM");
  }
  if (auto v = get("HEARTHLAB_HIDDEN_DIM")) {
    cfg.train.hidden_dim = parse_value<int>(*v, "HEARTHLAB_HIDDEN_DIM");
  }
  if (auto v = get("HEARTHLAB_CHECKPOINTS")) {
    cfg.checkpoints = parse_checkpoints(*v, "HEARTHLAB_CHECKPOINTS");
  }
  if (auto v = get("HEARTHLAB_EMBEDDING_PROVIDER")) {
    cfg.embedding_provider = *v;
  }
  if (auto v = get("HEARTHLAB_MASK_INVALID")) {
    cfg.train.mask_invalid = parse_bool(*v, "HEARTHLAB_MASK_INVALID");
  }
  if (auto v = get("HEARTHLAB_KEEP_PRIMITIVE_HEAD")) {
    cfg.keep_primitive_head = parse_bool(*v, "HEARTHLAB_KEEP_PRIMITIVE_HEAD");
  }
  if (auto v = get("HEARTHLAB_AGGREGATION")) {
    cfg.aggregation = parse_aggregation(*v);
  }
}

void check_config(const RunConfig& cfg) {
  auto positive = [](long v, const char* name) {
    if (v < 1) throw UsageError(std::string(name) + " must be >= 1");
  };
  positive(cfg.train.episodes, "episodes");
  positive(cfg.train.reward.max_steps, "max_steps");
  positive(cfg.seeds, "seeds");
  positive(cfg.train.feature_dim, "feature_dim");
  positive(cfg.train.hidden_dim, "hidden_dim");
  positive(cfg.embedding_dim, "embedding_dim");
  positive(cfg.train.ppo.epochs, "ppo.epochs");
  positive(cfg.train.ppo.minibatch, "ppo.minibatch");
  positive(cfg.train.ppo.rollout_steps, "ppo.rollout_steps");
  if (cfg.jobs < 0) throw UsageError("jobs must be >= 0");
  if (!(cfg.train.reward.c > 0)) throw UsageError("c must be > 0");
  if (cfg.checkpoints.empty()) throw UsageError("no checkpoints given");
  for (int cp : cfg.checkpoints) {
    if (cp < 1 || cp > cfg.train.episodes) {
      throw UsageError("checkpoint " + std::to_string(cp) +
                       " outside [1, episodes=" +
                       std::to_string(cfg.train.episodes) + "]");
    }
  }
  if (cfg.out.empty()) throw UsageError("empty output directory");
}

namespace {

// Flag values; unset ones leave lower layers alone.
struct Flags {
  std::optional<std::uint64_t> seed;
  std::optional<int> seeds;
  std::optional<int> episodes;
  std::optional<int> jobs;
  std::optional<std::string> out;
  std::optional<std::string> config;
  std::optional<std::string> provider;
  std::optional<std::string> checkpoints;
  std::optional<std::string> aggregation;
  bool keep_primitive_head = false;
  bool mask_invalid = false;
  bool self_sanity = false;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--seed", f.seed, "Base seed (runs use seed, seed+1, ...)");
  cmd->add_option("--seeds", f.seeds, "Number of seeds");
  cmd->add_option("--episodes", f.episodes, "Training episodes");
  cmd->add_option("--jobs", f.jobs, "Worker threads (default: logical cores)");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--config", f.config, "JSON config file");
  cmd->add_option("--embedding-provider", f.provider,
                  "hashed, file:<path> or http:<url>");
  cmd->add_flag("--keep-primitive-head", f.keep_primitive_head,
                "Keep the source primitive head when transplanting");
  cmd->add_flag("--mask-invalid", f.mask_invalid,
                "Sample only executable actions");
}

RunConfig resolve(const Flags& f, const EnvLookup& env) {
  RunConfig cfg;
  std::optional<std::string> config_path = f.config;
  if (!config_path) config_path = env("HEARTHLAB_CONFIG");
  if (config_path) {
    std::string text;
    try {
      text = read_text_file(*config_path);
    } catch (const LoadError& e) {
      throw UsageError(e.what());
    }
    apply_config_json(cfg, text, *config_path);
  }
  apply_env(cfg, env);
  if (f.seed) cfg.seed = *f.seed;
  if (f.seeds) cfg.seeds = *f.seeds;
  if (f.episodes) cfg.train.episodes = *f.episodes;
  if (f.jobs) cfg.jobs = *f.jobs;
  if (f.out) cfg.out = *f.out;
  if (f.provider) cfg.embedding_provider = *f.provider;
  if (f.checkpoints) cfg.checkpoints = parse_checkpoints(*f.checkpoints,
                                                         "--checkpoints");
  if (f.aggregation) cfg.aggregation = parse_aggregation(*f.aggregation);
  if (f.keep_primitive_head) cfg.keep_primitive_head = true;
  if (f.mask_invalid) cfg.train.mask_invalid = true;
  if (f.self_sanity) cfg.self_sanity = true;
  if (cfg.jobs == 0) {
    cfg.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  }
  return cfg;
}

// A path to a .act file, or a name looked up in `catalog_dir`.
Activity resolve_activity(const std::string& ref, const std::string& catalog_dir) {
  if (std::filesystem::is_regular_file(ref)) return load_activity(ref);
  if (std::filesystem::is_directory(catalog_dir)) {
    const auto catalog = load_catalog(catalog_dir);
    if (const Activity* a = find_activity(catalog, ref)) return *a;
  }
  throw LoadError("no activity file or catalog entry named '" + ref + "'");
}

void print_groundings(const Activity& act, std::ostream& out) {
  const auto& gs = act.grounded.groundings;
  out << gs.size() << (gs.size() == 1 ? " grounding" : " groundings") << "\n";
  for (std::size_t i = 0; i < gs.size(); ++i) {
    out << "grounding " << i;
    for (const auto& [label, obj] : gs[i].witness) {
      out << " " << label << "=" << obj;
    }
    out << " (" << gs[i].literals.size() << " literals)\n";
    for (const Literal& lit : gs[i].literals) {
      out << "  " << literal_to_string(lit, act.scene) << "\n";
    }
  }
  for (const auto& w : act.grounded.warnings) out << "warning: " << w << "\n";
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

int cmd_train(const std::string& ref, const std::string& catalog_dir,
              const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const Activity act = resolve_activity(ref, catalog_dir);
  std::vector<TrainResult> results(cfg.seeds);
  std::vector<std::function<void()>> jobs;
  for (int k = 0; k < cfg.seeds; ++k) {
    jobs.push_back([&, k] {
      results[k] = train(act, cfg.train, cfg.seed + static_cast<std::uint64_t>(k));
    });
  }
  const auto errors = run_parallel(jobs, cfg.jobs);
  bool failed = false;
  for (int k = 0; k < cfg.seeds; ++k) {
    if (!errors[k].empty()) {
      err << "seed " << cfg.seed + k << ": " << errors[k] << "\n";
      failed = true;
    }
  }
  if (failed) return 1;

  namespace fs = std::filesystem;
  const fs::path root(cfg.out);
  int best = 0;
  for (int k = 0; k < cfg.seeds; ++k) {
    write_text_file((root / "curves" /
                     (act.short_name + "__seed" +
                      std::to_string(cfg.seed + k) + ".csv"))
                        .string(),
                    curve_csv(results[k].curve));
    if (results[k].curve.final_mean() > results[best].curve.final_mean()) {
      best = k;
    }
  }
  const fs::path params_path = root / "params" / (act.short_name + ".json");
  write_text_file(params_path.string(), params_to_json(results[best].params));

  out << act.name << ": " << cfg.train.episodes << " episodes, "
      << cfg.seeds << (cfg.seeds == 1 ? " seed" : " seeds") << "\n";
  out << pad("seed", 8) << pad("final_mean", 12) << "success_rate\n";
  for (int k = 0; k < cfg.seeds; ++k) {
    const LearningCurve& c = results[k].curve;
    const std::size_t window = std::min<std::size_t>(64, c.size());
    int wins = 0;
    for (std::size_t e = c.size() - window; e < c.size(); ++e) {
      wins += c.successes[e];
    }
    out << pad(std::to_string(cfg.seed + k), 8)
        << pad(format_fixed(c.final_mean(), 3), 12)
        << format_fixed(static_cast<double>(wins) / window, 3) << "\n";
  }
  out << "best seed " << cfg.seed + best << " -> " << params_path.string()
      << "\n";
  return 0;
}

int cmd_grid(const std::string& catalog_dir, const std::string& sources_arg,
             const std::string& targets_arg, const RunConfig& cfg,
             std::ostream& out, std::ostream& err) {
  const auto catalog = load_catalog(catalog_dir);
  std::vector<std::string> sources = split_list(sources_arg);
  std::vector<std::string> targets = split_list(targets_arg);
  if (sources.empty()) {
    for (const Activity& a : catalog) sources.push_back(a.short_name);
  }
  if (targets.empty()) {
    for (const Activity& a : catalog) {
      if (!a.source_only) targets.push_back(a.short_name);
    }
  }
  for (const auto* list : {&sources, &targets}) {
    for (const auto& name : *list) {
      if (!find_activity(catalog, name)) {
        throw UsageError("unknown activity '" + name + "' in " + catalog_dir);
      }
    }
  }
  const auto provider =
      make_provider(cfg.embedding_provider, cfg.embedding_dim);

  GridConfig grid;
  grid.train = cfg.train;
  grid.checkpoints = cfg.checkpoints;
  grid.seeds = cfg.seeds;
  grid.seed = cfg.seed;
  grid.offset = cfg.offset;
  grid.jobs = cfg.jobs;
  grid.keep_primitive_head = cfg.keep_primitive_head;
  grid.self_sanity = cfg.self_sanity;
  grid.aggregation = cfg.aggregation;
  grid.quiet = false;

  TransferReport report;
  try {
    report = run_grid(catalog, sources, targets, grid, *provider);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  write_report(report, cfg.out);
  out << "report written to " << cfg.out << " (" << report.sources.size()
      << " sources x " << report.targets.size() << " targets)\n";
  for (const auto& f : report.failures) err << "failed: " << f << "\n";
  return report.failures.empty() ? 0 : 1;
}

int cmd_similarity(const std::string& catalog_dir, const RunConfig& cfg,
                   std::ostream& out) {
  const auto catalog = load_catalog(catalog_dir);
  Descriptions desc;
  std::vector<std::string> labels;
  for (const Activity& a : catalog) {
    desc.emplace_back(a.short_name, a.description());
    labels.push_back(a.short_name);
  }
  const auto provider =
      make_provider(cfg.embedding_provider, cfg.embedding_dim);
  const SimilarityMatrix sim = similarity_matrix(desc, *provider);
  out << matrix_csv(sim.labels, sim.labels, sim.values, 3);
  return 0;
}

int cmd_eval(const std::string& ref, const std::string& catalog_dir,
             const std::string& params_path, const RunConfig& cfg,
             std::ostream& out) {
  const Activity act = resolve_activity(ref, catalog_dir);
  const PolicyParams params = params_from_json(read_text_file(params_path));
  if (params.num_objects() != act.scene.size()) {
    throw LoadError("policy has " + std::to_string(params.num_objects()) +
                    " object outputs but '" + act.name + "' has " +
                    std::to_string(act.scene.size()) + " objects");
  }
  Rng env_rng(stream_seed(cfg.seed, SeedStream::kEnvironment));
  Rng policy_rng(stream_seed(cfg.seed, SeedStream::kPolicy));
  double sum = 0.0;
  int wins = 0;
  for (int e = 0; e < cfg.train.episodes; ++e) {
    const EpisodeResult r =
        run_episode(act, params, cfg.train.reward, env_rng, policy_rng,
                    cfg.train.mask_invalid);
    sum += r.total;
    wins += r.success ? 1 : 0;
  }
  out << act.name << ": mean_total " << format_fixed(sum / cfg.train.episodes, 3)
      << " success_rate "
      << format_fixed(static_cast<double>(wins) / cfg.train.episodes, 3)
      << " over " << cfg.train.episodes << " episodes\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err, const EnvLookup& env) {
  CLI::App app{"Symbolic household activities: PPO training and transfer grids",
               "hearthlab"};
  app.require_subcommand(1);
  Flags flags;
  std::string activity;
  std::string catalog_dir = "catalog";
  std::string sources, targets, params_path;
  bool groundings = false;

  auto* train_cmd = app.add_subcommand("train", "Train PPO on one activity");
  train_cmd->add_option("activity", activity, "Activity file or name")
      ->required();
  train_cmd->add_option("--catalog", catalog_dir, "Catalog directory");
  add_common(train_cmd, flags);

  auto* grid_cmd = app.add_subcommand("grid", "Run the source x target grid");
  grid_cmd->add_option("catalog", catalog_dir, "Catalog directory");
  grid_cmd->add_option("--sources", sources, "Comma-separated activity names");
  grid_cmd->add_option("--targets", targets, "Comma-separated activity names");
  grid_cmd->add_option("--checkpoints", flags.checkpoints,
                       "Comma-separated episode counts, e.g. 80,160");
  grid_cmd->add_option("--aggregation", flags.aggregation, "median or top");
  grid_cmd->add_flag("--self-sanity", flags.self_sanity,
                     "Fill source == target cells with scratch vs scratch");
  add_common(grid_cmd, flags);

  auto* render_cmd = app.add_subcommand("render", "Print state and goal text");
  render_cmd->add_option("activity", activity, "Activity file or name")
      ->required();
  render_cmd->add_option("--catalog", catalog_dir, "Catalog directory");
  render_cmd->add_flag("--groundings", groundings, "List every grounding");

  auto* sim_cmd = app.add_subcommand("similarity",
                                     "Print the description similarity matrix");
  sim_cmd->add_option("catalog", catalog_dir, "Catalog directory");
  add_common(sim_cmd, flags);

  auto* ground_cmd = app.add_subcommand("ground", "List goal groundings");
  ground_cmd->add_option("activity", activity, "Activity file or name")
      ->required();
  ground_cmd->add_option("--catalog", catalog_dir, "Catalog directory");

  auto* eval_cmd = app.add_subcommand("eval", "Run a saved policy");
  eval_cmd->add_option("activity", activity, "Activity file or name")
      ->required();
  eval_cmd->add_option("--params", params_path, "Policy JSON from train")
      ->required();
  eval_cmd->add_option("--catalog", catalog_dir, "Catalog directory");
  add_common(eval_cmd, flags);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    if (render_cmd->parsed()) {
      const Activity act = resolve_activity(activity, catalog_dir);
      out << render_state(act.initial, act.scene) << "\n"
          << render_goal(act.goal) << "\n";
      if (groundings) print_groundings(act, out);
      return 0;
    }
    if (ground_cmd->parsed()) {
      print_groundings(resolve_activity(activity, catalog_dir), out);
      return 0;
    }
    RunConfig cfg = resolve(flags, env);
    // Grid checkpoints default to 80/160; shorter runs only need them for grid.
    if (!grid_cmd->parsed()) cfg.checkpoints = {cfg.train.episodes};
    check_config(cfg);
    if (train_cmd->parsed()) {
      return cmd_train(activity, catalog_dir, cfg, out, err);
    }
    if (grid_cmd->parsed()) {
      return cmd_grid(catalog_dir, sources, targets, cfg, out, err);
    }
    if (sim_cmd->parsed()) return cmd_similarity(catalog_dir, cfg, out);
    if (eval_cmd->parsed()) {
      return cmd_eval(activity, catalog_dir, params_path, cfg, out);
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const LoadError& e) {
    err << "load error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace hearth
