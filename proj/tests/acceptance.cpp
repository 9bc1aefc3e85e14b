// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fail.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ihf/harness.hpp"
#include "ihf/numerics/blr.hpp"
#include "ihf/numerics/linalg.hpp"
#include "ihf/numerics/mlp.hpp"

using namespace ihf;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, a);
    return buf;
}

const harness::MetricsRow* row(const harness::MetricsTable& t, const std::string& mode, const std::string& subject,
                               int k) {
    for (const auto& r : t)
        if (r.mode == mode && r.subject == subject && r.k == k) return &r;
    return nullptr;
}

harness::ExperimentConfig base_config() {
    return harness::load_config(IHF_SOURCE_DIR "/configs/maze_full.json");
}

// ------------------------------------------------------------------ RL criteria

struct RlResults {
    harness::ExperimentConfig main_config;
    harness::MetricsTable main;    // 5 subjects, K=20, none/full/shaped
    double main_seconds = 0.0;
    harness::MetricsTable k10;     // subject 01, K=10, shaped
    harness::MetricsTable robust;  // subject 02, K=20, shaped + variants
};

RlResults run_rl() {
    RlResults out;
    auto a = base_config();
    a.modes = {"none", "full", "shaped"};
    a.k = {20};
    const auto t0 = std::chrono::steady_clock::now();
    out.main_config = a;
    out.main = harness::run_experiment(a).table;
    out.main_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    auto b = base_config();
    b.subjects = {"01"};
    b.modes = {"shaped"};
    b.k = {10};
    out.k10 = harness::run_experiment(b).table;

    auto c = base_config();
    c.subjects = {"02"};
    c.modes = {"shaped", "simple", "no_baseline", "no_beta"};
    c.k = {20};
    out.robust = harness::run_experiment(c).table;
    return out;
}

Outcome criterion1(const RlResults& rl) {
    double sum = 0.0;
    int n = 0;
    std::string per;
    for (const auto& r : rl.main)
        if (r.mode == "shaped" && r.reduction) {
            sum += *r.reduction;
            ++n;
            per += " " + r.subject + "=" + harness::format_percent(*r.reduction);
        }
    const double mean = n ? sum / n : 0.0;
    const bool ok = n == 5 && mean >= 0.70 && rl.main_seconds <= 900.0;
    return {ok, "mean reduction " + harness::format_percent(mean) + " (need >= 70.00%)," + per + "; runtime " +
                    fmt("%.0f", rl.main_seconds) + " s (need <= 900 s)"};
}

Outcome criterion2(const RlResults& rl) {
    const auto* none = row(rl.main, "none", "-", 0);
    const auto* full = row(rl.main, "full", "01", 0);
    const auto* shaped = row(rl.main, "shaped", "01", 20);
    if (!none || !full || !shaped) return {false, "missing rows"};
    const bool ok = shaped->complete_mean <= 0.67 * none->complete_mean && full->complete_mean < none->complete_mean;
    return {ok, "none " + fmt("%.1f", none->complete_mean) + ", full " + fmt("%.1f", full->complete_mean) +
                    ", shaped " + fmt("%.1f", shaped->complete_mean) + " (need shaped <= " +
                    fmt("%.1f", 0.67 * none->complete_mean) + " and full < none)"};
}

Outcome criterion3(const RlResults& rl) {
    const auto* k20 = row(rl.main, "shaped", "01", 20);
    const auto* k10 = row(rl.k10, "shaped", "01", 10);
    if (!k20 || !k10) return {false, "missing rows"};
    const bool ok = k20->complete_mean <= k10->complete_mean && k20->complete_std < k10->complete_std;
    return {ok, "K=20 " + fmt("%.1f", k20->complete_mean) + " +- " + fmt("%.1f", k20->complete_std) + ", K=10 " +
                    fmt("%.1f", k10->complete_mean) + " +- " + fmt("%.1f", k10->complete_std)};
}

Outcome criterion4(const RlResults& rl) {
    const auto* s = row(rl.robust, "shaped", "02", 20);
    const auto* simple = row(rl.robust, "simple", "02", 20);
    if (!s || !simple) return {false, "missing rows"};
    return {s->complete_mean <= simple->complete_mean,
            "shaped " + fmt("%.1f", s->complete_mean) + ", simple " + fmt("%.1f", simple->complete_mean)};
}

Outcome criterion5(const RlResults& rl) {
    const auto* s = row(rl.robust, "shaped", "02", 20);
    const auto* nb = row(rl.robust, "no_baseline", "02", 20);
    const auto* nbeta = row(rl.robust, "no_beta", "02", 20);
    if (!s || !nb || !nbeta) return {false, "missing rows"};
    const bool ok = s->complete_mean <= nb->complete_mean && s->complete_mean <= nbeta->complete_mean;
    return {ok, "shaped " + fmt("%.1f", s->complete_mean) + ", no_baseline " + fmt("%.1f", nb->complete_mean) +
                    ", no_beta " + fmt("%.1f", nbeta->complete_mean)};
}

// ------------------------------------------------------------------ decoder

Outcome criterion6() {
    const auto s = harness::run_decoder_experiment(base_config().decoder);
    const bool cv = s.cv.mean >= 0.85;
    const bool shift = s.shifted.auc_transfer >= s.shifted.auc_in - 0.10;
    const bool control = s.morphology.auc_transfer < s.morphology.auc_in - 0.10;
    return {cv && shift && control,
            "cv " + fmt("%.3f", s.cv.mean) + " +- " + fmt("%.3f", s.cv.std) + "; shifted " +
                fmt("%.3f", s.shifted.auc_in) + " -> " + fmt("%.3f", s.shifted.auc_transfer) + "; control " +
                fmt("%.3f", s.morphology.auc_in) + " -> " + fmt("%.3f", s.morphology.auc_transfer)};
}

// ------------------------------------------------------------------ numerics

double gradient_check_worst() {
    Rng rng = make_rng(100, "acceptance-grad");
    std::uniform_int_distribution<int> width(1, 6), depth(1, 3), batch(1, 4);
    std::normal_distribution<double> g(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<int> sizes{width(rng)};
        for (int l = depth(rng); l > 0; --l) sizes.push_back(width(rng));
        auto net = num::Mlp::glorot(sizes, rng, trial % 2 ? num::Activation::Relu : num::Activation::Linear);
        auto flat = net.flat_parameters();
        for (double& p : flat) p += 0.1 * g(rng);
        net.set_flat_parameters(flat);
        const int n = batch(rng);
        num::Matrix x(sizes.front(), n), up(sizes.back(), n);
        for (int i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
        for (int i = 0; i < up.size(); ++i) up.data()[i] = g(rng);
        num::Mlp::Cache cache;
        net.forward_batch(x, cache);
        const auto grads = net.backward(cache, up);
        std::vector<double> analytic;
        for (std::size_t l = 0; l < net.layer_count(); ++l) {
            analytic.insert(analytic.end(), grads.weights[l].data(), grads.weights[l].data() + grads.weights[l].size());
            analytic.insert(analytic.end(), grads.biases[l].data(), grads.biases[l].data() + grads.biases[l].size());
        }
        auto loss = [&](const std::vector<double>& p) {
            num::Mlp m = net;
            m.set_flat_parameters(p);
            return (m.forward_batch(x).array() * up.array()).sum();
        };
        for (std::size_t p = 0; p < flat.size(); ++p) {
            auto hi = flat, lo = flat;
            hi[p] += 1e-5;
            lo[p] -= 1e-5;
            const double fd = (loss(hi) - loss(lo)) / 2e-5;
            worst = std::max(worst, std::abs(analytic[p] - fd) / (std::abs(analytic[p]) + 1e-8));
        }
    }
    return worst;
}

Outcome criterion7() {
    const double grad = gradient_check_worst();

    Rng rng = make_rng(101, "acceptance-num");
    std::normal_distribution<double> g(0.0, 1.0);
    double simplex = 0.0, shift = 0.0;
    for (int i = 0; i < 1000; ++i) {
        num::Vector q(4);
        for (int a = 0; a < 4; ++a) q(a) = 5.0 * g(rng);
        const double alpha = 0.01 + std::abs(g(rng));
        const auto p = shaping::soft_policy(q, alpha);
        const auto s = shaping::soft_policy(q.array() + 100.0 * g(rng), alpha);
        simplex = std::max(simplex, std::abs(p.pi.sum() - 1.0));
        if (p.pi.minCoeff() < 0.0) simplex = 1.0;
        shift = std::max(shift, (p.pi - s.pi).cwiseAbs().maxCoeff());
    }

    double eig = 0.0, logexp = 0.0;
    for (int i = 0; i < 20; ++i) {
        num::Matrix a(10, 10);
        for (int k = 0; k < a.size(); ++k) a.data()[k] = g(rng);
        const num::Matrix sym = num::symmetrize(a);
        const auto e = num::sym_eig(sym);
        eig = std::max(eig, (e.vectors * e.values.asDiagonal() * e.vectors.transpose() - sym).norm() / sym.norm());
        const num::Matrix spd = a * a.transpose() + 10.0 * num::Matrix::Identity(10, 10);
        logexp = std::max(logexp, (num::sym_exp(num::spd_log(spd)) - spd).norm() / spd.norm());
    }

    num::Matrix f(20, 5);
    num::Vector y(20);
    for (int k = 0; k < f.size(); ++k) f.data()[k] = g(rng);
    for (int k = 0; k < y.size(); ++k) y(k) = g(rng);
    const auto prior = num::BayesLinReg::prior(5, 1.0, 0.5);
    const auto batch = num::blr_update(prior, f, y);
    auto seq = prior;
    for (int r = 0; r < 20; ++r) seq = num::blr_update(seq, f.row(r), y.segment(r, 1));
    const double blr = std::max((batch.mean - seq.mean).norm(), (batch.covariance - seq.covariance).norm());

    const bool ok = grad < 1e-4 && simplex <= 1e-12 && shift <= 1e-12 && eig < 1e-9 && blr < 1e-10 && logexp < 1e-8;
    std::ostringstream d;
    d << "grad " << grad << ", simplex " << simplex << ", shift " << shift << ", eig " << eig << ", blr " << blr
      << ", expm(logm) " << logexp;
    return {ok, d.str()};
}

// ------------------------------------------------------------------ oracles

Outcome criterion8() {
    int mismatches = 0, cells = 0;
    Rng rng = make_rng(102, "acceptance-mazes");
    const envs::GridPos delta[4] = {{0, -1}, {0, 1}, {-1, 0}, {1, 0}};
    for (int trial = 0; trial < 5; ++trial) {
        envs::MazeMap map;
        while (true) {
            std::string text;
            for (int y = 0; y < 6; ++y) {
                for (int x = 0; x < 6; ++x)
                    text += (x == 0 && y == 0) ? 'S' : (x == 5 && y == 5) ? 'T' : (bernoulli(rng, 0.3) ? '#' : '.');
                text += '\n';
            }
            try {
                map = envs::load_maze(text);
                break;
            } catch (const std::invalid_argument&) {
            }
        }
        const auto game = envs::Game::maze(map);
        // Exhaustive shortest paths: Bellman-Ford style relaxation to a fixed point.
        std::vector<int> dist(36, 1 << 20);
        dist[35] = 0;
        for (bool changed = true; changed;) {
            changed = false;
            for (int c = 0; c < 36; ++c) {
                const envs::GridPos p{c % 6, c / 6};
                if (map.is_wall(p)) continue;
                for (const auto& d : delta) {
                    const envs::GridPos n{p.x + d.x, p.y + d.y};
                    if (!map.in_bounds(n) || map.is_wall(n)) continue;
                    if (dist[n.y * 6 + n.x] + 1 < dist[c]) {
                        dist[c] = dist[n.y * 6 + n.x] + 1;
                        changed = true;
                    }
                }
            }
        }
        for (int c = 0; c < 35; ++c) {
            const envs::GridPos p{c % 6, c / 6};
            if (map.is_wall(p) || dist[c] >= (1 << 20)) continue;
            std::vector<envs::ActionId> expect;
            for (int a = 0; a < 4; ++a) {
                const envs::GridPos n{p.x + delta[a].x, p.y + delta[a].y};
                if (map.in_bounds(n) && !map.is_wall(n) && dist[n.y * 6 + n.x] == dist[c] - 1)
                    expect.push_back(envs::ActionId{a});
            }
            ++cells;
            mismatches += game.optimal_actions(envs::MazeState{p}) != expect;
        }
    }

    // 2-state fixture: tabular Q and t on the cells of "S.T".
    const auto chain = envs::Game::maze(envs::load_maze("S.T\n"));
    shaping::HumanQModel q{num::Mlp({3, 4}), 1.0};
    q.net.weight(0) << 0.1, -0.4, 0.0, 0.2, 0.3, 0.0, -0.5, 0.6, 0.0, 0.7, 0.9, 0.0;
    shaping::BaselineModel t{num::Mlp({3, 1})};
    t.net.weight(0) << 0.25, -0.5, 0.0;
    const envs::GameState s0 = envs::MazeState{{0, 0}}, s1 = envs::MazeState{{1, 0}};
    const double r1 = shaping::aux_reward(chain, q, &t, s0, envs::maze_action::Right, s1, false, 0.9);
    const double r2 = shaping::aux_reward(chain, q, &t, s1, envs::maze_action::Left, s0, false, 0.9);
    const double r3 = shaping::aux_reward(chain, q, &t, s1, envs::maze_action::Right, envs::MazeState{{2, 0}}, true, 0.9);
    const double aux_err = std::max({std::abs(r1 - (0.95 - 0.9 * 0.4)), std::abs(r2 - (0.1 - 0.9 * 0.95)),
                                     std::abs(r3 - 0.4)});

    // All-ErrP state: J1 per sample equals (|A|-1)/|A| under any model.
    feedback::LabeledDataset all_errp;
    for (int a = 0; a < 4; ++a) all_errp.labels.push_back({s1, envs::ActionId{a}, true, 0});
    Rng r = make_rng(103);
    const shaping::HumanQModel random{num::Mlp::glorot({3, 6, 4}, r), 0.5};
    const double j1_err = std::abs(shaping::j1_per_sample(chain, random, all_errp) - 0.75);

    const bool ok = mismatches == 0 && cells > 0 && aux_err < 1e-12 && j1_err < 1e-12;
    std::ostringstream d;
    d << cells << " maze cells, " << mismatches << " mismatches; aux_reward err " << aux_err << "; J1 err " << j1_err;
    return {ok, d.str()};
}

// ------------------------------------------------------------------ determinism

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = harness::read_text(e.path());
    return files;
}

bool pipeline(const fs::path& dir) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string cli = IHF_CLI;
    const std::string d = dir.string() + "/";
    nlohmann::json cfg = base_config();
    cfg["subjects"] = {"01"};
    cfg["modes"] = harness::kModes;
    cfg["k"] = {3};
    cfg["seeds"] = {0, 1};
    cfg["random_transitions"] = 200;
    cfg["reward_training"]["epochs"] = 100;
    cfg["agent"]["episode_cap"] = 150;
    cfg["decoder"]["n_per_class"] = 60;
    cfg["decoder"]["folds"] = 5;
    harness::write_text(dir / "config.json", harness::dump(cfg));
    const std::vector<std::string> steps = {
        "gen-traj --game maze --k 5 --seed 3 --out " + d + "traj.tsv",
        "label --traj " + d + "traj.tsv --subject 02 --seed 3 --out " + d + "labels.tsv",
        "sample-transitions --game maze --n 300 --seed 3 --out " + d + "walk.tsv",
        "learn-reward --labels " + d + "labels.tsv --random-transitions " + d + "walk.tsv --epochs 200 --seed 3 --out " +
            d + "reward.bin",
        "learn-reward --mode simple --labels " + d + "labels.tsv --epochs 200 --seed 3 --out " + d + "simple.bin",
        "train-agent --mode shaped --reward " + d + "reward.bin --seed 3 --cap 200 --out " + d + "shaped.json",
        "train-agent --mode simple --reward " + d + "simple.bin --seed 3 --cap 200 --out " + d + "simple.json",
        "train-agent --mode full --subject 02 --seed 3 --cap 200 --out " + d + "full.json",
        "synth-epochs --n-per-class 40 --seed 5 --out " + d + "train.epochs",
        "synth-epochs --n-per-class 40 --seed 6 --out " + d + "test.epochs",
        "train-decoder --train " + d + "train.epochs --out " + d + "decoder.bin",
        "eval-decoder --model " + d + "decoder.bin --test " + d + "test.epochs --out " + d + "eval.json",
        "decoder-report --config " + d + "config.json --out " + d + "decoder.json",
        "run --config " + d + "config.json --out-dir " + d + "run",
        "ablate --config " + d + "config.json --variant no_beta --out-dir " + d + "ablate",
        "verify --dir " + d + "run",
    };
    for (const auto& s : steps) {
        const std::string cmd = cli + " " + s + " > " + d + "log.txt 2>&1";
        if (std::system(cmd.c_str()) != 0) {
            std::fprintf(stderr, "command failed: %s\n", cmd.c_str());
            return false;
        }
    }
    fs::remove(dir / "log.txt");
    return true;
}

Outcome criterion9() {
    const fs::path dir = fs::temp_directory_path() / "ihf_acceptance_cli";
    if (!pipeline(dir)) return {false, "pipeline command failed"};
    const auto first = snapshot(dir);
    if (!pipeline(dir)) return {false, "pipeline command failed on rerun"};
    const auto second = snapshot(dir);
    fs::remove_all(dir);
    std::vector<std::string> differ;
    for (const auto& [name, bytes] : first) {
        auto it = second.find(name);
        if (it == second.end() || it->second != bytes) differ.push_back(name);
    }
    if (first.size() != second.size()) differ.push_back("<file set>");
    std::string detail = std::to_string(first.size()) + " files compared";
    for (const auto& n : differ) detail += ", differs: " + n;
    return {differ.empty() && !first.empty(), detail};
}

}  // namespace

int main() {
    std::vector<std::pair<int, std::function<Outcome()>>> checks;
    RlResults rl;
    bool rl_ready = false;
    std::string rl_error;
    auto need_rl = [&]() -> const RlResults& {
        if (!rl_ready) {
            rl = run_rl();
            rl_ready = true;
        }
        return rl;
    };
    checks.push_back({1, [&] { return criterion1(need_rl()); }});
    checks.push_back({2, [&] { return criterion2(need_rl()); }});
    checks.push_back({3, [&] { return criterion3(need_rl()); }});
    checks.push_back({4, [&] { return criterion4(need_rl()); }});
    checks.push_back({5, [&] { return criterion5(need_rl()); }});
    checks.push_back({6, criterion6});
    checks.push_back({7, criterion7});
    checks.push_back({8, criterion8});
    checks.push_back({9, criterion9});

    int failed = 0;
    for (const auto& [id, check] : checks) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("criterion %d: %s  %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    if (rl_ready) {
        std::printf("\n%s", harness::summary_text(rl.main_config, rl.main).c_str());
    }
    return failed == 0 ? 0 : 1;
}
