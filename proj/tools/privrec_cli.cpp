/*
 * Copyright 2026 The privrec Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// privrec_cli: dataset generation, weight training, recommendation, epsilon
// sweeps and the local perturbation/clustering flow.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 privacy budget exhausted.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "privrec/privrec.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace privrec {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Config file: a JSON object. Top-level keys set the option of that name on
// whichever command runs; an object keyed by a command name sets options for
// that command only and wins over top-level keys. A manifest written by this
// tool is accepted as well (its "config" member is used).

class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(const CLI::App* root) : root_(root) {}

  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw CLI::ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw CLI::ConfigError("config must be a JSON object");
    if (doc.contains("config") && doc.contains("version")) doc = doc.at("config");

    std::vector<CLI::ConfigItem> sections, shared;
    for (const auto& [key, value] : doc.items()) {
      const CLI::App* sub = find_subcommand(key);
      if (sub != nullptr && value.is_object()) {
        for (const auto& [name, v] : value.items()) {
          if (v.is_null()) continue;
          if (sub->get_option_no_throw("--" + name) == nullptr) {
            throw CLI::ConfigError("unknown setting '" + key + "." + name + "'");
          }
          sections.push_back(item({key}, name, v));
        }
        continue;
      }
      if (value.is_null()) continue;
      bool used = false;
      for (const CLI::App* s : root_->get_subcommands({})) {
        if (s->get_option_no_throw("--" + key) != nullptr) {
          shared.push_back(item({s->get_name()}, key, value));
          used = true;
        }
      }
      if (!used) throw CLI::ConfigError("unknown setting '" + key + "'");
    }
    // the first value seen for an option is kept
    sections.insert(sections.end(), shared.begin(), shared.end());
    return sections;
  }

 private:
  const CLI::App* find_subcommand(const std::string& name) const {
    for (const CLI::App* s : root_->get_subcommands({})) {
      if (s->get_name() == name) return s;
    }
    return nullptr;
  }

  static std::string scalar(const json& v, const std::string& name) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    throw CLI::ConfigError("setting '" + name + "' must be a string, number or boolean");
  }

  static CLI::ConfigItem item(std::vector<std::string> parents, const std::string& name,
                              const json& v) {
    CLI::ConfigItem out;
    out.parents = std::move(parents);
    out.name = name;
    if (v.is_array()) {
      for (const auto& x : v) out.inputs.push_back(scalar(x, name));
    } else {
      out.inputs.push_back(scalar(v, name));
    }
    return out;
  }

  const CLI::App* root_;
};

// ---------------------------------------------------------------------------
// Options. Every option registers a writer so the resolved value can be
// recorded in the manifest.

enum class Group { kGeneral, kDataFile, kSynthesis, kOutput };

struct Setting {
  std::string name;
  Group group;
  std::function<void(ordered_json&)> write;
};

class Command {
 public:
  Command(CLI::App& app, const std::string& name, const std::string& help)
      : sub_(app.add_subcommand(name, help)) {}

  CLI::App* app() const { return sub_; }
  const std::string& name() const { return sub_->get_name(); }

  template <class T>
  CLI::Option* add(const std::string& name, T& var, const std::string& help,
                   Group group = Group::kGeneral) {
    settings_.push_back({name, group, [name, &var](ordered_json& j) { put(j, name, var); }});
    return sub_->add_option("--" + name, var, help)->capture_default_str();
  }

  CLI::Option* flag(const std::string& name, bool& var, const std::string& help) {
    settings_.push_back({name, Group::kGeneral, [name, &var](ordered_json& j) { j[name] = var; }});
    return sub_->add_flag("--" + name, var, help);
  }

  /// Resolved settings; file and synthesis settings are mutually exclusive.
  ordered_json resolved(bool from_file) const {
    ordered_json j = ordered_json::object();
    for (const auto& s : settings_) {
      if (s.group == Group::kOutput) continue;  // reruns may target another directory
      if (s.group == Group::kDataFile && !from_file) continue;
      if (s.group == Group::kSynthesis && from_file) continue;
      s.write(j);
    }
    return j;
  }

  bool any_given(Group group) const {
    for (const auto& s : settings_) {
      if (s.group == group && sub_->get_option("--" + s.name)->count() > 0) return true;
    }
    return false;
  }

 private:
  template <class T>
  static void put(ordered_json& j, const std::string& name, const T& v) {
    if constexpr (std::is_floating_point_v<T>) {
      if (!std::isfinite(v)) return;  // unset / unbounded
      j[name] = v;
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.empty()) j[name] = v;
    } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
      if (!v.empty()) j[name] = v;
    } else {
      j[name] = v;
    }
  }

  CLI::App* sub_;
  std::vector<Setting> settings_;
};

struct DataOptions {
  std::string path;
  SynthesisSpec spec;
  std::uint64_t seed = 1;

  void add(Command& cmd) {
    cmd.add("data", path, "catalog JSONL file", Group::kDataFile);
    add_synthesis(cmd, spec);
    cmd.add("seed", seed, "master seed");
  }

  static void add_synthesis(Command& cmd, SynthesisSpec& s) {
    cmd.add("users", s.users, "synthetic users", Group::kSynthesis);
    cmd.add("videos", s.videos, "synthetic videos", Group::kSynthesis);
    cmd.add("dim", s.dim, "embedding dimension", Group::kSynthesis);
    cmd.add("topics", s.topics, "topic count", Group::kSynthesis);
    cmd.add("noise", s.noise, "per-modality noise", Group::kSynthesis);
    cmd.add("events-per-user", s.events_per_user, "videos shown per user", Group::kSynthesis);
    cmd.add("affinity", s.affinity, "user vector length", Group::kSynthesis);
    cmd.add("mixture-sharpness", s.mixture_sharpness, "topic mixture concentration",
            Group::kSynthesis);
    cmd.add("exposure", s.exposure, "interest bias of exposure", Group::kSynthesis);
  }

  Catalog load(const Command& cmd) {
    if (!path.empty()) {
      if (cmd.any_given(Group::kSynthesis)) {
        throw UsageError("--data cannot be combined with synthesis settings");
      }
      return load_catalog(path);
    }
    spec.seed = seed;
    return synthesize(spec);
  }
};

struct WeightOptions {
  double alpha = 1.0 / 3.0;
  double beta = 1.0 / 3.0;
  double gamma = 1.0 / 3.0;
  std::string file;

  void add(Command& cmd) {
    cmd.add("alpha", alpha, "visual weight");
    cmd.add("beta", beta, "text weight");
    cmd.add("gamma", gamma, "audio weight");
    cmd.add("weights", file, "weights JSON from train-weights (overrides alpha/beta/gamma)");
  }

  FusionWeights resolve() const {
    if (file.empty()) return FusionWeights(alpha, beta, gamma);
    std::ifstream in(file);
    if (!in) throw DataError("cannot open weights '" + file + "'");
    try {
      return json::parse(in).get<FusionWeights>();
    } catch (const json::exception& e) {
      throw DataError("weights '" + file + "': " + e.what());
    }
  }
};

// ---------------------------------------------------------------------------
// Output helpers.

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text) || !out.flush()) {
    throw DataError("cannot write '" + path.string() + "'");
  }
}

fs::path prepare_out(const std::string& dir) {
  if (dir.empty()) throw UsageError("--out is required");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory '" + dir + "': " + ec.message());
  return fs::path(dir);
}

void write_manifest(const fs::path& dir, const Command& cmd, bool from_file, std::uint64_t seed,
                    const std::vector<std::string>& outputs, ordered_json extra = {}) {
  ordered_json m;
  m["version"] = kVersion;
  m["command"] = cmd.name();
  m["seed"] = seed;
  m["config"][cmd.name()] = cmd.resolved(from_file);
  m["outputs"] = outputs;
  if (!extra.is_null()) m["results"] = std::move(extra);
  write_text(dir / "manifest.json", m.dump(2) + "\n");
}

ordered_json weights_json(const FusionWeights& w) {
  return ordered_json{{"alpha", w.alpha()}, {"beta", w.beta()}, {"gamma", w.gamma()}};
}

// ---------------------------------------------------------------------------
// generate

struct GenerateCmd {
  Command cmd;
  SynthesisSpec spec;
  std::string out;

  explicit GenerateCmd(CLI::App& app) : cmd(app, "generate", "write a synthetic catalog") {
    DataOptions::add_synthesis(cmd, spec);
    cmd.add("seed", spec.seed, "generator seed");
    cmd.add("out", out, "output directory", Group::kOutput);
  }

  int run() {
    const auto dir = prepare_out(out);
    const Catalog c = synthesize(spec);
    std::ostringstream text;
    write_catalog(text, c);
    write_text(dir / "catalog.jsonl", text.str());
    write_manifest(dir, cmd, false, spec.seed, {"catalog.jsonl"});
    std::cout << "wrote " << c.videos().size() << " videos, " << c.users().size() << " users, "
              << c.interactions().size() << " interactions to " << (dir / "catalog.jsonl").string()
              << '\n';
    return 0;
  }
};

// ---------------------------------------------------------------------------
// validate

struct ValidateCmd {
  Command cmd;
  std::string path;

  explicit ValidateCmd(CLI::App& app) : cmd(app, "validate", "check a catalog file") {
    cmd.add("data", path, "catalog JSONL file", Group::kDataFile);
  }

  int run() {
    if (path.empty()) throw UsageError("--data is required");
    const Catalog c = load_catalog(path);  // throws DataError listing every violation
    std::cout << "ok: " << c.videos().size() << " videos, " << c.users().size() << " users, "
              << c.interactions().size() << " interactions, dimension " << c.dimension() << '\n';
    return 0;
  }
};

// ---------------------------------------------------------------------------
// train-weights

struct TrainCmd {
  Command cmd;
  DataOptions data;
  WeightOptions initial;
  TrainingConfig training;
  std::string out;

  explicit TrainCmd(CLI::App& app) : cmd(app, "train-weights", "fit modality weights") {
    data.add(cmd);
    initial.add(cmd);
    cmd.add("steps", training.steps, "gradient steps");
    cmd.add("step-size", training.step_size, "step size");
    cmd.add("half-life", training.half_life, "recency half-life of positives (seconds)");
    cmd.add("out", out, "output directory", Group::kOutput);
  }

  int run() {
    const auto dir = prepare_out(out);
    const Catalog c = data.load(cmd);
    const FusionWeights start = initial.resolve();
    const FusionWeights fitted = train_weights(c, start, training);
    const WeightTrainingProblem problem(c, start, training.half_life);
    ordered_json j = weights_json(fitted);
    j["initial_loss"] = problem.loss(start);
    j["final_loss"] = problem.loss(fitted);
    write_text(dir / "weights.json", j.dump(2) + "\n");
    write_manifest(dir, cmd, !data.path.empty(), data.seed, {"weights.json"});
    std::cout << "alpha=" << format_real(fitted.alpha()) << " beta=" << format_real(fitted.beta())
              << " gamma=" << format_real(fitted.gamma()) << '\n';
    return 0;
  }
};

// ---------------------------------------------------------------------------
// recommend

struct RecommendCmd {
  Command cmd;
  DataOptions data;
  WeightOptions weights;
  std::string strategy = "pipeline";
  std::string mechanism = "uniform";
  NoiseConfig noise;
  double budget = kInf;
  std::string ledger_path;
  std::size_t k = 10;
  std::size_t candidates = 200;
  double half_life = kInf;
  std::vector<std::string> users;
  std::vector<std::string> members;
  HybridOptions hybrid;
  std::string out;

  explicit RecommendCmd(CLI::App& app) : cmd(app, "recommend", "rank videos for users") {
    data.add(cmd);
    weights.add(cmd);
    cmd.add("strategy", strategy, "pipeline, content, cf, hybrid or group")
        ->check(CLI::IsMember({"pipeline", "content", "cf", "hybrid", "group"}));
    cmd.add("mechanism", mechanism, "score noise for the pipeline: none, uniform or adaptive")
        ->check(CLI::IsMember({"none", "uniform", "adaptive"}));
    cmd.add("epsilon", noise.epsilon, "privacy budget per pass");
    cmd.add("sensitivity", noise.sensitivity, "score sensitivity");
    cmd.add("omega-floor", noise.omega_floor, "lower bound on importance weights");
    cmd.add("budget", budget, "total privacy budget of the ledger");
    cmd.add("ledger", ledger_path, "ledger JSON carried across runs");
    cmd.add("k", k, "list length");
    cmd.add("candidates", candidates, "retrieval candidates per user");
    cmd.add("half-life", half_life, "recency half-life of positives (seconds)");
    cmd.add("user", users, "users to serve (default: all)");
    cmd.add("members", members, "group members for --strategy group");
    cmd.add("blend", hybrid.blend, "hybrid weight of the collaborative score");
    cmd.add("neighbors", hybrid.neighbor_count, "collaborative neighbours");
    cmd.flag("chaining", hybrid.chaining, "append close content neighbours in hybrid lists");
    cmd.add("chain-threshold", hybrid.chain_threshold, "minimum cosine for chaining");
    cmd.add("out", out, "output directory", Group::kOutput);
  }

  int run() {
    if (k == 0) throw UsageError("k must be at least 1");
    if (candidates == 0) throw UsageError("candidates must be at least 1");
    const auto dir = prepare_out(out);
    const Catalog c = data.load(cmd);
    const FusedCatalog fused(c, weights.resolve());
    const Mechanism mech = parse_mechanism(mechanism);
    const bool noisy = strategy == "pipeline" && mech != Mechanism::kNone;

    std::vector<std::string> targets = users;
    if (targets.empty() && strategy != "group") targets = c.users();
    for (const auto& u : targets) c.require_user(u);

    std::vector<std::string> outputs{"recommendations.csv"};
    ordered_json results;
    PrivacyLedger ledger(budget);
    if (noisy) {
      noise.validate();
      if (!ledger_path.empty() && fs::exists(ledger_path)) {
        std::ifstream in(ledger_path);
        try {
          ledger = json::parse(in).get<PrivacyLedger>();
        } catch (const json::exception& e) {
          throw DataError("ledger '" + ledger_path + "': " + e.what());
        }
      }
      // one pass over disjoint users: parallel composition, one charge
      ledger.charge(noise.epsilon);
    }

    std::ostringstream csv;
    csv << "user_id,rank,video_id,score\n";
    auto emit = [&csv](const std::string& who, const RankedList& list) {
      for (std::size_t i = 0; i < list.entries.size(); ++i) {
        csv << csv_field(who) << ',' << (i + 1) << ',' << csv_field(list.entries[i].video_id)
            << ',' << format_fixed6(list.entries[i].score) << '\n';
      }
    };

    const Rng root(data.seed);
    if (strategy == "group") {
      if (members.empty()) throw UsageError("--members is required for the group strategy");
      emit("group", group_recommend(members, fused, k));
    } else {
      for (const auto& id : targets) {
        const std::size_t index = c.require_user(id);
        if (strategy == "pipeline") {
          const auto interest = build_user_vector(id, fused, half_life);
          const auto seen = c.positive_videos(index);
          const auto cands = retrieve_candidates(interest, fused, candidates, seen);
          Rng rng = root.split(index);
          const auto privatizer = make_privatizer(mech, interest, cands, fused, noise, rng);
          emit(id, rank_top_k(interest, cands, fused, k, privatizer));
        } else if (strategy == "content") {
          emit(id, content_recommend(id, fused, k));
        } else if (strategy == "cf") {
          emit(id, cf_recommend(id, c, k, hybrid.neighbor_count));
        } else {
          emit(id, hybrid_recommend(id, fused, k, hybrid));
        }
      }
    }

    write_text(dir / "recommendations.csv", csv.str());
    if (noisy) {
      const std::string ledger_text = json(ledger).dump(2) + "\n";
      write_text(dir / "ledger.json", ledger_text);
      outputs.push_back("ledger.json");
      if (!ledger_path.empty()) write_text(ledger_path, ledger_text);
      results["privacy_loss"] = ledger.consumed();
    }
    write_manifest(dir, cmd, !data.path.empty(), data.seed, outputs, results);
    return 0;
  }
};

// ---------------------------------------------------------------------------
// sweep

struct SweepCmd {
  Command cmd;
  DataOptions data;
  WeightOptions weights;
  SweepConfig config;
  std::string mechanism = "both";
  bool no_latency = false;
  std::string out;

  explicit SweepCmd(CLI::App& app) : cmd(app, "sweep", "precision/recall over an epsilon grid") {
    data.add(cmd);
    weights.add(cmd);
    cmd.add("epsilons", config.epsilons, "epsilon grid")->delimiter(',');
    cmd.add("k", config.k, "list length");
    cmd.add("trials", config.trials, "trials per epsilon");
    cmd.add("mechanism", mechanism, "uniform, adaptive or both")
        ->check(CLI::IsMember({"uniform", "adaptive", "both"}));
    cmd.add("holdout", config.holdout_fraction, "fraction of each user's positives held out");
    cmd.add("candidates", config.candidate_count, "retrieval candidates per user");
    cmd.add("sensitivity", config.sensitivity, "score sensitivity");
    cmd.add("omega-floor", config.omega_floor, "lower bound on importance weights");
    cmd.add("budget", config.budget, "privacy budget per epsilon and mechanism");
    cmd.add("jobs", config.jobs, "worker threads");
    cmd.flag("no-latency", no_latency, "skip latency.csv (the only timing-dependent output)");
    cmd.add("out", out, "output directory", Group::kOutput);
  }

  int run() {
    const auto dir = prepare_out(out);
    const Catalog c = data.load(cmd);
    config.weights = weights.resolve();
    config.seed = data.seed;
    config.validate();

    std::vector<Mechanism> mechs;
    if (mechanism != "adaptive") mechs.push_back(Mechanism::kUniform);
    if (mechanism != "uniform") mechs.push_back(Mechanism::kAdaptive);

    const EvalPipeline pipeline(c, config);
    std::vector<EvalReport> all;
    std::map<Mechanism, std::vector<EvalReport>> by_mech;
    for (Mechanism m : mechs) {
      SweepConfig cfg = config;
      cfg.mechanism = m;
      by_mech[m] = run_sweep(pipeline, cfg);
      all.insert(all.end(), by_mech[m].begin(), by_mech[m].end());
    }

    std::vector<std::string> outputs{"sweep.csv", "plot_data.csv", "trend.csv", "ledger.json"};
    std::ostringstream sweep, plot, trend, latency;
    write_sweep_csv(sweep, all);
    write_plot_data(plot, all);
    write_text(dir / "sweep.csv", sweep.str());
    write_text(dir / "plot_data.csv", plot.str());

    // Spearman correlation of epsilon with per-trial metrics, and whether the
    // means are non-decreasing along the grid.
    trend << "mechanism,metric,rho,p_greater,non_decreasing\n";
    for (const auto& [m, reports] : by_mech) {
      for (const bool precision : {true, false}) {
        std::vector<double> eps, values;
        bool monotone = true;
        std::vector<std::pair<double, double>> means;
        for (const auto& r : reports) {
          const auto& per_trial = precision ? r.trial_precision : r.trial_recall;
          for (double v : per_trial) {
            eps.push_back(r.epsilon);
            values.push_back(v);
          }
          means.push_back({r.epsilon, precision ? r.precision_at_k : r.recall_at_k});
        }
        std::sort(means.begin(), means.end());
        for (std::size_t i = 1; i < means.size(); ++i) monotone &= means[i].second >= means[i - 1].second;
        stats::CorrelationTest t;
        if (eps.size() >= 2) t = stats::spearman(eps, values);
        trend << to_string(m) << ',' << (precision ? "precision_at_k" : "recall_at_k") << ','
              << format_real(t.rho) << ',' << format_real(t.p_greater) << ','
              << (monotone ? "true" : "false") << '\n';
      }
    }
    write_text(dir / "trend.csv", trend.str());

    if (by_mech.size() == 2) {
      std::ostringstream cmp;
      write_comparison_csv(cmp, compare_mechanisms(by_mech[Mechanism::kUniform],
                                                   by_mech[Mechanism::kAdaptive]));
      write_text(dir / "comparison.csv", cmp.str());
      outputs.push_back("comparison.csv");
    }

    ordered_json ledgers = ordered_json::array();
    for (const auto& r : all) {
      ordered_json j;
      j["mechanism"] = to_string(r.mechanism);
      j["epsilon"] = r.epsilon;
      j["ledger"] = json(r.ledger);
      ledgers.push_back(std::move(j));
    }
    write_text(dir / "ledger.json", ledgers.dump(2) + "\n");

    if (!no_latency) {
      write_latency_csv(latency, all);
      write_text(dir / "latency.csv", latency.str());
      outputs.push_back("latency.csv");
    }
    ordered_json results;
    results["users_evaluated"] = pipeline.users().size();
    write_manifest(dir, cmd, !data.path.empty(), data.seed, outputs, results);
    std::cout << sweep.str();
    return 0;
  }
};

// ---------------------------------------------------------------------------
// localpipe

struct LocalPipeCmd {
  Command cmd;
  DataOptions data;
  WeightOptions weights;
  double epsilon = 1.0;
  double grid_step = 0.1;
  double template_step = 0.0;
  std::size_t clusters = 4;
  int max_iters = 100;
  double half_life = kInf;
  std::string out;

  explicit LocalPipeCmd(CLI::App& app)
      : cmd(app, "localpipe", "perturb preference vectors on the client and cluster them") {
    data.add(cmd);
    weights.add(cmd);
    cmd.add("epsilon", epsilon, "client privacy budget per profile");
    cmd.add("grid-step", grid_step, "client quantization step");
    cmd.add("template-step", template_step, "server template grid (0: same as grid-step)");
    cmd.add("clusters", clusters, "cluster count");
    cmd.add("max-iters", max_iters, "k-means iteration limit");
    cmd.add("half-life", half_life, "recency half-life of positives (seconds)");
    cmd.add("out", out, "output directory", Group::kOutput);
  }

  int run() {
    const auto dir = prepare_out(out);
    const Catalog c = data.load(cmd);
    const FusedCatalog fused(c, weights.resolve());
    const Rng root(data.seed);

    // client side
    std::vector<PerturbedProfile> uploads;
    const Rng client = root.split(1);
    for (std::size_t i = 0; i < c.users().size(); ++i) {
      Rng rng = client.split(i);
      uploads.push_back(
          perturb_profile(build_user_vector(c.users()[i], fused, half_life), epsilon, grid_step, rng));
    }
    // upload order must not reveal catalog order
    Rng shuffle = root.split(3);
    for (std::size_t i = uploads.size(); i > 1; --i) std::swap(uploads[i - 1], uploads[shuffle.below(i)]);

    // server side: sees only the uploads
    const ProfileTemplate tmpl{c.dimension(), template_step > 0.0 ? template_step : grid_step};
    const auto standardized = standardize(uploads, tmpl);
    Rng cluster_rng = root.split(2);
    const auto result = cluster_profiles(standardized, clusters, max_iters, cluster_rng);

    std::ostringstream up, cl, cen;
    write_uploads_jsonl(up, uploads);
    write_clusters_csv(cl, result);
    cen << "cluster_id,size,centroid\n";
    std::vector<std::size_t> sizes(result.centroids.size(), 0);
    for (const auto& a : result.assignments) ++sizes[a.cluster_id];
    for (std::size_t i = 0; i < result.centroids.size(); ++i) {
      std::string values;
      for (double x : result.centroids[i]) values += (values.empty() ? "" : " ") + format_fixed6(x);
      cen << i << ',' << sizes[i] << ',' << csv_field(values) << '\n';
    }
    write_text(dir / "uploads.jsonl", up.str());
    write_text(dir / "clusters.csv", cl.str());
    write_text(dir / "centroids.csv", cen.str());
    ordered_json results;
    results["iterations"] = result.iterations;
    results["converged"] = result.converged;
    results["objective"] = result.objective_history.back();
    write_manifest(dir, cmd, !data.path.empty(), data.seed,
                   {"uploads.jsonl", "clusters.csv", "centroids.csv"}, results);
    return 0;
  }
};

int run(int argc, char** argv) {
  CLI::App app{"privacy-preserving multimodal video recommendation"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "JSON config file; command-line flags take precedence");
  app.config_formatter(std::make_shared<JsonConfig>(&app));

  GenerateCmd generate(app);
  ValidateCmd validate_cmd(app);
  TrainCmd train(app);
  RecommendCmd recommend(app);
  SweepCmd sweep(app);
  LocalPipeCmd localpipe(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (generate.cmd.app()->parsed()) return generate.run();
    if (validate_cmd.cmd.app()->parsed()) return validate_cmd.run();
    if (train.cmd.app()->parsed()) return train.run();
    if (recommend.cmd.app()->parsed()) return recommend.run();
    if (sweep.cmd.app()->parsed()) return sweep.run();
    if (localpipe.cmd.app()->parsed()) return localpipe.run();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace
}  // namespace privrec

int main(int argc, char** argv) { return privrec::run(argc, argv); }
