#include "ihf/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "ihf/feedback.hpp"

namespace ihf::harness {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------- config I/O

namespace {

// Reads keys from an object and remembers which ones were consumed, so
// leftovers can be reported as unknown.
class Fields {
public:
    Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j.is_object()) throw std::invalid_argument(where_ + ": expected an object");
    }
    template <typename T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            j_.at(key).get_to(out);
        } catch (const json::exception& e) {
            throw std::invalid_argument(where_ + "." + key + ": " + e.what());
        }
    }
    const json* sub(const char* key) {
        seen_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }
    void finish() const {
        for (const auto& [key, value] : j_.items())
            if (!seen_.count(key)) throw std::invalid_argument(where_ + ": unknown key '" + key + "'");
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

json adam_json(const num::AdamConfig& a) {
    return {{"lr", a.lr}, {"beta1", a.beta1}, {"beta2", a.beta2}, {"eps", a.eps}};
}

void read_adam(const json& j, num::AdamConfig& a, const std::string& where) {
    Fields f(j, where);
    f.get("lr", a.lr);
    f.get("beta1", a.beta1);
    f.get("beta2", a.beta2);
    f.get("eps", a.eps);
    f.finish();
}

json agent_json(const agent::AgentConfig& a) {
    return {{"feature_dim", a.feature_dim},
            {"hidden", a.hidden},
            {"gamma", a.gamma},
            {"adam", adam_json(a.adam)},
            {"batch_size", a.batch_size},
            {"replay_capacity", a.replay_capacity},
            {"learning_starts", a.learning_starts},
            {"train_every", a.train_every},
            {"target_sync_interval", a.target_sync_interval},
            {"posterior_update_interval", a.posterior_update_interval},
            {"thompson_interval", a.thompson_interval},
            {"thompson_step_interval", a.thompson_step_interval},
            {"prior_var", a.prior_var},
            {"noise_var", a.noise_var},
            {"episode_cap", a.episode_cap}};
}

void read_agent(const json& j, agent::AgentConfig& a) {
    Fields f(j, "agent");
    f.get("feature_dim", a.feature_dim);
    f.get("hidden", a.hidden);
    f.get("gamma", a.gamma);
    if (const json* s = f.sub("adam")) read_adam(*s, a.adam, "agent.adam");
    f.get("batch_size", a.batch_size);
    f.get("replay_capacity", a.replay_capacity);
    f.get("learning_starts", a.learning_starts);
    f.get("train_every", a.train_every);
    f.get("target_sync_interval", a.target_sync_interval);
    f.get("posterior_update_interval", a.posterior_update_interval);
    f.get("thompson_interval", a.thompson_interval);
    f.get("thompson_step_interval", a.thompson_step_interval);
    f.get("prior_var", a.prior_var);
    f.get("noise_var", a.noise_var);
    f.get("episode_cap", a.episode_cap);
    f.finish();
}

json synth_json(const decoder::SyntheticEegConfig& s) {
    return {{"n_channels", s.n_channels},           {"fs", s.fs},
            {"erp_amplitude", s.erp_amplitude},     {"erp_latency", s.erp_latency},
            {"noise_sigma", s.noise_sigma},         {"spectrum_tilt", s.spectrum_tilt},
            {"drift_amplitude", s.drift_amplitude}, {"seed", s.seed},
            {"source_seed", s.source_seed}};
}

void read_synth(const json& j, decoder::SyntheticEegConfig& s) {
    Fields f(j, "decoder.synth");
    f.get("n_channels", s.n_channels);
    f.get("fs", s.fs);
    f.get("erp_amplitude", s.erp_amplitude);
    f.get("erp_latency", s.erp_latency);
    f.get("noise_sigma", s.noise_sigma);
    f.get("spectrum_tilt", s.spectrum_tilt);
    f.get("drift_amplitude", s.drift_amplitude);
    f.get("seed", s.seed);
    f.get("source_seed", s.source_seed);
    f.finish();
}

json decoder_json(const DecoderExperiment& d) {
    const auto& p = d.params;
    return {{"nfilter", p.nfilter},
            {"nelec", p.nelec},
            {"lambda", p.net.lambda},
            {"l1_ratio", p.net.l1_ratio},
            {"tol", p.net.tol},
            {"max_sweeps", p.net.max_sweeps},
            {"rho", p.rho},
            {"band_lo", p.band_lo},
            {"band_hi", p.band_hi},
            {"synth", synth_json(d.synth)},
            {"n_per_class", d.n_per_class},
            {"folds", d.folds},
            {"shift_tilt", d.shift_tilt},
            {"shift_drift", d.shift_drift},
            {"shift_latency", d.shift_latency}};
}

void read_decoder(const json& j, DecoderExperiment& d) {
    Fields f(j, "decoder");
    auto& p = d.params;
    f.get("nfilter", p.nfilter);
    f.get("nelec", p.nelec);
    f.get("lambda", p.net.lambda);
    f.get("l1_ratio", p.net.l1_ratio);
    f.get("tol", p.net.tol);
    f.get("max_sweeps", p.net.max_sweeps);
    f.get("rho", p.rho);
    f.get("band_lo", p.band_lo);
    f.get("band_hi", p.band_hi);
    if (const json* s = f.sub("synth")) read_synth(*s, d.synth);
    f.get("n_per_class", d.n_per_class);
    f.get("folds", d.folds);
    f.get("shift_tilt", d.shift_tilt);
    f.get("shift_drift", d.shift_drift);
    f.get("shift_latency", d.shift_latency);
    f.finish();
}

}  // namespace

void to_json(json& j, const ExperimentConfig& c) {
    j = json{{"game", c.game},
             {"map", c.map},
             {"subjects_file", c.subjects_file},
             {"subjects", c.subjects},
             {"modes", c.modes},
             {"k", c.k},
             {"seeds", c.seeds},
             {"alpha", c.soft_q.alpha},
             {"gamma", c.soft_q.gamma},
             // b = null encodes the constant schedule (JSON has no infinity)
             {"beta", {{"a", c.beta.a}, {"b", std::isinf(c.beta.b) ? json(nullptr) : json(c.beta.b)}}},
             {"mcts", {{"c", c.mcts.c}, {"gamma", c.mcts.gamma}, {"max_steps", c.mcts.max_steps}}},
             {"random_transitions", c.random_transitions},
             {"reward_training",
              {{"epochs", c.reward_training.epochs},
               {"hidden", c.reward_training.hidden},
               {"adam", adam_json(c.reward_training.adam)}}},
             {"agent", agent_json(c.agent)},
             {"full_access_penalty", c.full_access_penalty},
             {"decoder", decoder_json(c.decoder)},
             {"output_dir", c.output_dir}};
}

void from_json(const json& j, ExperimentConfig& c) {
    c = ExperimentConfig{};
    Fields f(j, "config");
    f.get("game", c.game);
    f.get("map", c.map);
    f.get("subjects_file", c.subjects_file);
    f.get("subjects", c.subjects);
    f.get("modes", c.modes);
    f.get("k", c.k);
    f.get("seeds", c.seeds);
    f.get("alpha", c.soft_q.alpha);
    f.get("gamma", c.soft_q.gamma);
    if (const json* b = f.sub("beta")) {
        Fields fb(*b, "beta");
        fb.get("a", c.beta.a);
        if (const json* bb = fb.sub("b")) c.beta.b = bb->is_null() ? std::numeric_limits<double>::infinity() : bb->get<double>();
        fb.finish();
    }
    if (const json* m = f.sub("mcts")) {
        Fields fm(*m, "mcts");
        fm.get("c", c.mcts.c);
        fm.get("gamma", c.mcts.gamma);
        fm.get("max_steps", c.mcts.max_steps);
        fm.finish();
    }
    f.get("random_transitions", c.random_transitions);
    if (const json* r = f.sub("reward_training")) {
        Fields fr(*r, "reward_training");
        fr.get("epochs", c.reward_training.epochs);
        fr.get("hidden", c.reward_training.hidden);
        if (const json* a = fr.sub("adam")) read_adam(*a, c.reward_training.adam, "reward_training.adam");
        fr.finish();
    }
    if (const json* a = f.sub("agent")) read_agent(*a, c.agent);
    f.get("full_access_penalty", c.full_access_penalty);
    if (const json* d = f.sub("decoder")) read_decoder(*d, c.decoder);
    f.get("output_dir", c.output_dir);
    f.finish();
}

void ExperimentConfig::validate() const {
    envs::parse_game(game);
    if (subjects.empty()) throw std::invalid_argument("config: subjects is empty");
    if (modes.empty()) throw std::invalid_argument("config: modes is empty");
    for (const auto& m : modes)
        if (std::find(kModes.begin(), kModes.end(), m) == kModes.end())
            throw std::invalid_argument("config: unknown mode '" + m + "'");
    if (seeds.empty()) throw std::invalid_argument("config: seeds is empty");
    for (int kk : k)
        if (kk < 1) throw std::invalid_argument("config: K must be positive");
    if (k.empty()) throw std::invalid_argument("config: k is empty");
    if (!(soft_q.alpha > 0.0)) throw std::invalid_argument("config: alpha must be positive");
    if (soft_q.gamma < 0.0 || soft_q.gamma > 1.0) throw std::invalid_argument("config: gamma must be in [0,1]");
    beta.validate();
    if (random_transitions < 0) throw std::invalid_argument("config: random_transitions must be non-negative");
    if (agent.episode_cap < 1) throw std::invalid_argument("config: agent.episode_cap must be positive");
}

ExperimentConfig load_config(const fs::path& path) {
    json j;
    try {
        j = json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw std::invalid_argument(path.string() + ": " + e.what());
    }
    ExperimentConfig c = j.get<ExperimentConfig>();
    c.validate();
    return c;
}

// ---------------------------------------------------------------- scheduling

int worker_count() {
    if (const char* w = std::getenv("WORKERS")) {
        const int n = std::atoi(w);
        if (n >= 1) return n;
    }
    return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& task) {
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto drain = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                task(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
    if (threads <= 1) {
        drain();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(drain);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------- experiment

namespace {

bool has_mode(const ExperimentConfig& c, const std::string& m) {
    return std::find(c.modes.begin(), c.modes.end(), m) != c.modes.end();
}

bool needs_reward(const ExperimentConfig& c) {
    for (const char* m : {"shaped", "simple", "no_baseline", "no_beta"})
        if (has_mode(c, m)) return true;
    return false;
}

std::string context(const std::string& subject, int k, std::uint64_t seed, const std::string& mode) {
    std::ostringstream os;
    os << "subject " << subject << " K=" << k << " seed " << seed << " mode " << mode;
    return os.str();
}

struct RewardModels {
    long labels = 0;
    std::shared_ptr<const shaping::RewardTable> with_baseline;
    std::shared_ptr<const shaping::RewardTable> without_baseline;
    std::shared_ptr<const shaping::RewardTable> simple;
};

RewardModels fit_rewards(const envs::Game& game, const ExperimentConfig& c, const feedback::SubjectProfile& profile,
                         int k, std::uint64_t seed) {
    mcts::MctsConfig mc = c.mcts;
    mc.k = k;
    mc.seed = seed;
    const auto trajs = mcts::generate_trajectories(game, mc);
    Rng label_rng = make_rng(seed, "label/" + profile.id);
    const auto data = feedback::label_trajectories(game, trajs, profile, label_rng);

    shaping::TrainConfig tc = c.reward_training;
    tc.seed = seed;
    RewardModels out;
    out.labels = feedback::count_queries(data);
    if (has_mode(c, "shaped") || has_mode(c, "no_baseline") || has_mode(c, "no_beta")) {
        const auto q = shaping::fit_human_q(game, data, c.soft_q, tc);
        if (has_mode(c, "shaped") || has_mode(c, "no_beta")) {
            Rng random_rng = make_rng(seed, "random");
            auto transitions = feedback::label_transitions(game, data);
            const auto walk = feedback::sample_random_transitions(game, static_cast<std::size_t>(c.random_transitions), random_rng);
            transitions.insert(transitions.end(), walk.transitions.begin(), walk.transitions.end());
            const auto baseline = shaping::fit_baseline(game, q, transitions, c.soft_q, tc);
            out.with_baseline = std::make_shared<const shaping::RewardTable>(
                shaping::RewardTable::soft_q(game, q, &baseline, c.soft_q.gamma));
        }
        if (has_mode(c, "no_baseline"))
            out.without_baseline = std::make_shared<const shaping::RewardTable>(
                shaping::RewardTable::soft_q(game, q, nullptr, c.soft_q.gamma));
    }
    if (has_mode(c, "simple"))
        out.simple = std::make_shared<const shaping::RewardTable>(
            shaping::RewardTable::simple(game, shaping::fit_simple_baseline(game, data, tc)));
    return out;
}

struct RunSpec {
    std::string mode;
    std::string subject;  // "-" for none
    int k = 0;
    std::uint64_t seed = 0;
    int reward = -1;  // index into the fitted reward list
};

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, int workers) {
    config.validate();
    const auto game = envs::Game::make(
        envs::parse_game(config.game),
        config.map.empty() ? std::optional<envs::MazeMap>(envs::default_maze())
                           : std::optional<envs::MazeMap>(envs::load_maze_file(config.map)));
    const auto profiles =
        config.subjects_file.empty() ? feedback::builtin_profiles() : feedback::load_profiles(config.subjects_file);
    std::vector<feedback::SubjectProfile> subjects;
    for (const auto& id : config.subjects) subjects.push_back(feedback::find_profile(profiles, id));

    // Phase 1: reward models per (subject, K, seed).
    struct FitKey {
        std::size_t subject;
        int k;
        std::uint64_t seed;
    };
    std::vector<FitKey> fits;
    if (needs_reward(config))
        for (std::size_t s = 0; s < subjects.size(); ++s)
            for (int k : config.k)
                for (auto seed : config.seeds) fits.push_back({s, k, seed});
    std::vector<RewardModels> rewards(fits.size());
    parallel_for(fits.size(), workers, [&](std::size_t i) {
        const auto& f = fits[i];
        try {
            rewards[i] = fit_rewards(game, config, subjects[f.subject], f.k, f.seed);
        } catch (const std::exception& e) {
            throw std::runtime_error(context(subjects[f.subject].id, f.k, f.seed, "reward-fit") + ": " + e.what());
        }
    });

    // Phase 2: training runs in a fixed order.
    std::vector<RunSpec> specs;
    if (has_mode(config, "none"))
        for (auto seed : config.seeds) specs.push_back({"none", "-", 0, seed, -1});
    if (has_mode(config, "full"))
        for (const auto& s : subjects)
            for (auto seed : config.seeds) specs.push_back({"full", s.id, 0, seed, -1});
    for (std::size_t i = 0; i < fits.size(); ++i)
        for (const char* m : {"shaped", "no_baseline", "no_beta", "simple"})
            if (has_mode(config, m))
                specs.push_back({m, subjects[fits[i].subject].id, fits[i].k, fits[i].seed, static_cast<int>(i)});

    ExperimentResult result;
    result.config = config;
    result.runs.resize(specs.size());
    parallel_for(specs.size(), workers, [&](std::size_t i) {
        const RunSpec& spec = specs[i];
        agent::TrainingSetup setup;
        setup.config = config.agent;
        setup.seed = spec.seed;
        setup.subject = spec.subject;
        setup.k = spec.k;
        if (spec.mode == "none") {
            setup.mode = agent::NoFeedback{};
        } else if (spec.mode == "full") {
            setup.mode = agent::FullAccess{config.full_access_penalty, feedback::find_profile(profiles, spec.subject)};
        } else {
            const RewardModels& r = rewards[static_cast<std::size_t>(spec.reward)];
            if (spec.mode == "shaped") setup.mode = agent::Shaped{r.with_baseline, config.beta, r.labels};
            if (spec.mode == "no_baseline") setup.mode = agent::Shaped{r.without_baseline, config.beta, r.labels};
            if (spec.mode == "no_beta")
                setup.mode = agent::Shaped{r.with_baseline, shaping::BetaSchedule::constant(1.0), r.labels};
            if (spec.mode == "simple") setup.mode = agent::SimpleShaped{r.simple, config.beta, r.labels};
        }
        try {
            RunRecord rec = agent::run_training(game, setup);
            rec.mode = spec.mode;
            result.runs[i] = std::move(rec);
        } catch (const std::exception& e) {
            throw std::runtime_error(context(spec.subject, spec.k, spec.seed, spec.mode) + ": " + e.what());
        }
    });
    result.table = compute_metrics(result.runs);
    return result;
}

ExperimentResult ablate(const ExperimentConfig& config, const std::string& variant, int workers) {
    if (variant != "no_baseline" && variant != "no_beta" && variant != "simple")
        throw std::invalid_argument("ablate: variant must be no_baseline, no_beta or simple");
    ExperimentConfig c = config;
    c.modes = {"shaped", variant};
    c.output_dir = (fs::path(config.output_dir) / ("ablate_" + variant)).string();
    return run_experiment(c, workers);
}

// ---------------------------------------------------------------- metrics

namespace {

std::pair<double, double> mean_std(const std::vector<double>& v) {
    if (v.empty()) return {0.0, 0.0};
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return {m, std::sqrt(ss / static_cast<double>(v.size()))};
}

int mode_rank(const std::string& m) {
    const auto it = std::find(kModes.begin(), kModes.end(), m);
    return static_cast<int>(it - kModes.begin());
}

}  // namespace

MetricsTable compute_metrics(const std::vector<RunRecord>& runs) {
    struct Group {
        std::vector<double> complete, queries;
        int converged = 0;
    };
    // key order: mode rank, subject, K
    std::map<std::tuple<int, std::string, int>, Group> groups;
    for (const auto& r : runs) {
        auto& g = groups[{mode_rank(r.mode), r.subject, r.k}];
        g.complete.push_back(r.complete_episode);
        g.queries.push_back(static_cast<double>(r.queries));
        g.converged += r.converged ? 1 : 0;
    }
    std::optional<double> none_mean;
    std::map<std::string, double> full_queries;
    for (const auto& [key, g] : groups) {
        const auto& [rank, subject, k] = key;
        if (kModes[static_cast<std::size_t>(rank)] == "none") none_mean = mean_std(g.complete).first;
        if (kModes[static_cast<std::size_t>(rank)] == "full") full_queries[subject] = mean_std(g.queries).first;
    }

    MetricsTable table;
    for (const auto& [key, g] : groups) {
        const auto& [rank, subject, k] = key;
        MetricsRow row;
        row.mode = kModes[static_cast<std::size_t>(rank)];
        row.subject = subject;
        row.k = k;
        row.runs = static_cast<int>(g.complete.size());
        std::tie(row.complete_mean, row.complete_std) = mean_std(g.complete);
        row.converged = g.converged;
        row.queries_mean = mean_std(g.queries).first;
        if (none_mean && row.complete_mean > 0.0) row.speedup = *none_mean / row.complete_mean;
        if (row.mode != "none") {
            const auto it = full_queries.find(subject);
            if (it != full_queries.end() && it->second > 0.0) row.reduction = 1.0 - row.queries_mean / it->second;
        }
        table.push_back(row);
    }
    return table;
}

CurveBand aggregate_curves(const std::vector<const RunRecord*>& runs) {
    CurveBand band;
    std::size_t len = 0;
    for (const auto* r : runs) len = std::max(len, r->success_curve.size());
    band.mean.assign(len, 0.0);
    band.std.assign(len, 0.0);
    if (runs.empty()) return band;
    std::vector<double> column(runs.size());
    for (std::size_t e = 0; e < len; ++e) {
        for (std::size_t i = 0; i < runs.size(); ++i) {
            const auto& c = runs[i]->success_curve;
            column[i] = c.empty() ? 0.0 : (e < c.size() ? c[e] : c.back());
        }
        std::tie(band.mean[e], band.std[e]) = mean_std(column);
    }
    return band;
}

// ---------------------------------------------------------------- output

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << text;
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

std::string read_text(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

namespace {

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

std::string file_token(const std::string& s) {
    std::string out = s;
    for (char& ch : out)
        if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' && ch != '.') ch = '_';
    return out;
}

json row_json(const MetricsRow& r) {
    return {{"mode", r.mode},
            {"subject", r.subject},
            {"k", r.k},
            {"runs", r.runs},
            {"complete_mean", r.complete_mean},
            {"complete_std", r.complete_std},
            {"converged", r.converged},
            {"queries_mean", r.queries_mean},
            {"speedup", r.speedup ? json(*r.speedup) : json(nullptr)},
            {"reduction", r.reduction ? json(*r.reduction) : json(nullptr)}};
}

}  // namespace

std::vector<PlotFile> emit_plots(const ExperimentConfig& config, const std::vector<RunRecord>& runs) {
    if (runs.empty()) throw std::invalid_argument("emit_plots: no runs");
    // One figure per (subject, K) among the demonstration-based runs; runs
    // without subject or K (none, full) join every figure they apply to.
    std::set<std::pair<std::string, int>> figures;
    for (const auto& r : runs)
        if (r.k > 0) figures.insert({r.subject, r.k});
    if (figures.empty())
        for (const auto& r : runs) figures.insert({r.subject, 0});

    const std::string provenance = "# config: " + json(config).dump() + "\n";
    std::vector<PlotFile> files;
    for (const auto& [subject, k] : figures) {
        std::vector<std::pair<std::string, CurveBand>> columns;
        for (const auto& mode : kModes) {
            std::vector<const RunRecord*> members;
            for (const auto& r : runs) {
                if (r.mode != mode) continue;
                const bool applies = r.mode == "none" || (r.subject == subject && (r.k == k || r.mode == "full"));
                if (applies) members.push_back(&r);
            }
            if (!members.empty()) columns.emplace_back(mode, aggregate_curves(members));
        }
        std::size_t len = 0;
        for (const auto& [m, band] : columns) len = std::max(len, band.mean.size());
        std::ostringstream os;
        os << provenance << "episode";
        for (const auto& [m, band] : columns) os << ',' << m << "_mean," << m << "_std";
        os << '\n';
        for (std::size_t e = 0; e < len; ++e) {
            os << e + 1;
            for (const auto& [m, band] : columns) {
                const std::size_t at = std::min(e, band.mean.size() - 1);
                os << ',' << fixed(band.mean[at], 6) << ',' << fixed(band.std[at], 6);
            }
            os << '\n';
        }
        std::string name = "curves_" + file_token(subject) + (k > 0 ? "_k" + std::to_string(k) : "") + ".csv";
        files.push_back({name, os.str()});
    }
    return files;
}

std::string format_percent(double fraction) { return fixed(100.0 * fraction, 2) + "%"; }

std::string summary_text(const ExperimentConfig& config, const MetricsTable& table) {
    std::ostringstream os;
    char line[256];
    std::snprintf(line, sizeof(line), "%-12s %-8s %4s %5s %18s %9s %12s %9s %10s\n", "mode", "subject", "K", "runs",
                  "complete_episode", "converged", "queries", "speedup", "reduction");
    os << line;
    for (const auto& r : table) {
        const std::string ce = fixed(r.complete_mean, 2) + " +- " + fixed(r.complete_std, 2);
        const std::string sp = r.speedup ? fixed(*r.speedup, 2) + "x" : "-";
        const std::string red = r.reduction ? format_percent(*r.reduction) : "-";
        std::snprintf(line, sizeof(line), "%-12s %-8s %4d %5d %18s %9d %12s %9s %10s\n", r.mode.c_str(),
                      r.subject.c_str(), r.k, r.runs, ce.c_str(), r.converged, fixed(r.queries_mean, 1).c_str(),
                      sp.c_str(), red.c_str());
        os << line;
    }

    // Average query counts per subject at the largest K, full access vs proposed.
    const int k_max = *std::max_element(config.k.begin(), config.k.end());
    std::vector<const MetricsRow*> full, shaped;
    for (const auto& r : table) {
        if (r.mode == "full") full.push_back(&r);
        if (r.mode == "shaped" && r.k == k_max) shaped.push_back(&r);
    }
    if (!full.empty() && !shaped.empty()) {
        os << "\nAverage number of queries (K=" << k_max << ")\n";
        os << "subject       full_access     proposed    reduction\n";
        double sum_red = 0.0;
        int n = 0;
        for (const auto* f : full)
            for (const auto* s : shaped)
                if (s->subject == f->subject) {
                    const double red = 1.0 - s->queries_mean / f->queries_mean;
                    std::snprintf(line, sizeof(line), "%-10s %14s %12s %12s\n", f->subject.c_str(),
                                  fixed(f->queries_mean, 1).c_str(), fixed(s->queries_mean, 1).c_str(),
                                  format_percent(red).c_str());
                    os << line;
                    sum_red += red;
                    ++n;
                }
        if (n > 0) os << "mean reduction " << format_percent(sum_red / n) << "\n";
    }
    os << "\nseeds:";
    for (auto s : config.seeds) os << ' ' << s;
    os << "\nconfig: " << json(config).dump() << "\n";
    return os.str();
}

json runs_document(const ExperimentConfig& config, const std::vector<RunRecord>& runs) {
    return {{"config", config}, {"seeds", config.seeds}, {"runs", runs}};
}

json metrics_document(const ExperimentConfig& config, const MetricsTable& table) {
    json rows = json::array();
    for (const auto& r : table) rows.push_back(row_json(r));
    return {{"config", config}, {"seeds", config.seeds}, {"metrics", rows}};
}

void write_artifacts(const ExperimentResult& result, const fs::path& dir) {
    fs::create_directories(dir);
    write_text(dir / "runs.json", dump(runs_document(result.config, result.runs)));
    write_text(dir / "metrics.json", dump(metrics_document(result.config, result.table)));
    for (const auto& f : emit_plots(result.config, result.runs)) write_text(dir / f.name, f.contents);
    write_text(dir / "summary.txt", summary_text(result.config, result.table));
}

namespace {

ExperimentResult load_runs(const fs::path& dir) {
    const json doc = json::parse(read_text(dir / "runs.json"));
    ExperimentResult r;
    r.config = doc.at("config").get<ExperimentConfig>();
    r.runs = doc.at("runs").get<std::vector<RunRecord>>();
    r.table = compute_metrics(r.runs);
    return r;
}

}  // namespace

ExperimentResult report(const fs::path& dir) {
    ExperimentResult r = load_runs(dir);
    write_artifacts(r, dir);
    return r;
}

std::vector<std::string> verify(const fs::path& dir) {
    std::vector<std::string> problems;
    ExperimentResult r;
    try {
        r = load_runs(dir);
    } catch (const std::exception& e) {
        return {std::string("runs.json: ") + e.what()};
    }
    for (std::size_t i = 0; i < r.runs.size(); ++i) {
        const auto& run = r.runs[i];
        const std::string tag = "run " + std::to_string(i) + " (" + run.mode + ")";
        if (run.success_curve != success_curve(run.wins)) problems.push_back(tag + ": success curve does not match wins");
        if (run.wins.size() != run.episode_steps.size()) problems.push_back(tag + ": per-episode arrays differ in length");
        long steps = 0;
        for (int s : run.episode_steps) steps += s;
        if (steps != run.env_steps) problems.push_back(tag + ": env_steps does not match episode steps");
        const int expected = run.converged ? static_cast<int>(run.wins.size()) : run.episode_cap;
        if (run.complete_episode != expected) problems.push_back(tag + ": complete_episode inconsistent");
        if (run.mode == "full" && run.queries != run.env_steps) problems.push_back(tag + ": full-access queries != env steps");
    }

    auto compare_file = [&](const std::string& name, const std::string& expected) {
        std::string actual;
        try {
            actual = read_text(dir / name);
        } catch (const std::exception&) {
            problems.push_back(name + ": missing");
            return;
        }
        if (actual != expected) problems.push_back(name + ": does not match the stored runs");
    };
    try {
        const json stored = json::parse(read_text(dir / "metrics.json"));
        const auto& rows = stored.at("metrics");
        if (rows.size() != r.table.size()) {
            problems.push_back("metrics.json: row count differs");
        } else {
            for (std::size_t i = 0; i < rows.size(); ++i) {
                const json want = row_json(r.table[i]);
                for (const char* key : {"complete_mean", "complete_std", "queries_mean", "speedup", "reduction"}) {
                    const json& a = rows[i].at(key);
                    const json& b = want.at(key);
                    const bool same = a.is_null() || b.is_null() ? a.is_null() == b.is_null()
                                                                 : std::abs(a.get<double>() - b.get<double>()) <= 1e-9;
                    if (!same) problems.push_back("metrics.json row " + std::to_string(i) + ": " + key + " mismatch");
                }
                for (const char* key : {"mode", "subject", "k", "runs", "converged"})
                    if (rows[i].at(key) != want.at(key))
                        problems.push_back("metrics.json row " + std::to_string(i) + ": " + key + " mismatch");
            }
        }
        if (stored.at("config") != json(r.config)) problems.push_back("metrics.json: config differs from runs.json");
    } catch (const std::exception& e) {
        problems.push_back(std::string("metrics.json: ") + e.what());
    }
    for (const auto& f : emit_plots(r.config, r.runs)) compare_file(f.name, f.contents);
    compare_file("summary.txt", summary_text(r.config, r.table));
    return problems;
}

// ---------------------------------------------------------------- decoder

DecoderSummary run_decoder_experiment(const DecoderExperiment& config) {
    DecoderSummary s;
    const auto epochs = decoder::synth_epochs(config.synth, config.n_per_class);
    s.cv = decoder::cross_validate(epochs, config.params, config.folds, config.synth.seed);

    decoder::SyntheticEegConfig shifted = config.synth;
    shifted.spectrum_tilt += config.shift_tilt;
    shifted.drift_amplitude *= config.shift_drift;
    shifted.seed = config.synth.seed + 1000;
    s.shifted = decoder::zero_shot_eval(config.synth, shifted, config.params, config.n_per_class);

    decoder::SyntheticEegConfig moved = shifted;
    moved.erp_latency += config.shift_latency;
    s.morphology = decoder::zero_shot_eval(config.synth, moved, config.params, config.n_per_class);
    return s;
}

json decoder_document(const DecoderExperiment& config, const DecoderSummary& s) {
    return {{"config", decoder_json(config)},
            {"cv", {{"fold_auc", s.cv.fold_auc}, {"mean", s.cv.mean}, {"std", s.cv.std}}},
            {"shifted", {{"auc_in", s.shifted.auc_in}, {"auc_transfer", s.shifted.auc_transfer}}},
            {"morphology", {{"auc_in", s.morphology.auc_in}, {"auc_transfer", s.morphology.auc_transfer}}}};
}

}  // namespace ihf::harness
