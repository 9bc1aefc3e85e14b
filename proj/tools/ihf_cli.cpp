// Command-line front end. Every subcommand writes deterministic files: no
// timestamps, no host information, reals printed round-trip exact.

#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ihf/agent.hpp"
#include "ihf/datafiles.hpp"
#include "ihf/decoder.hpp"
#include "ihf/envs.hpp"
#include "ihf/feedback.hpp"
#include "ihf/harness.hpp"
#include "ihf/mcts.hpp"
#include "ihf/shaping.hpp"

using namespace ihf;
using nlohmann::json;

namespace {

envs::Game make_game(const std::string& name, const std::string& map) {
    const auto id = envs::parse_game(name);
    if (id != envs::GameId::Maze) return envs::Game::make(id);
    return envs::Game::make(id, map.empty() ? envs::default_maze() : envs::load_maze_file(map));
}

std::vector<feedback::SubjectProfile> profiles_from(const std::string& file) {
    return file.empty() ? feedback::builtin_profiles() : feedback::load_profiles(file);
}

void print_problems(const std::vector<std::string>& problems) {
    for (const auto& p : problems) std::cerr << "verify: " << p << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Implicit human feedback workbench"};
    app.require_subcommand(1);

    // gen-traj
    std::string game_name = "maze", map_path, out;
    int k = 20, max_steps = 0;
    double c = 0.5, mcts_gamma = 0.9;
    std::uint64_t seed = 0;
    auto* gen = app.add_subcommand("gen-traj", "Generate MCTS demonstration trajectories");
    gen->add_option("--game", game_name)->check(CLI::IsMember({"wobble", "catch", "maze"}));
    gen->add_option("--map", map_path, "Maze layout file (default: built-in)");
    gen->add_option("--k", k, "Trajectory count")->check(CLI::PositiveNumber);
    gen->add_option("--c", c, "UCB exploration coefficient");
    gen->add_option("--gamma", mcts_gamma, "Return discount for backups");
    gen->add_option("--max-steps", max_steps, "Per-trajectory step cap (0: game limit)");
    gen->add_option("--seed", seed);
    gen->add_option("--out", out)->required();

    // label
    std::string traj_path, subject = "01", subjects_file;
    auto* lab = app.add_subcommand("label", "Pass trajectories through a simulated feedback channel");
    lab->add_option("--traj", traj_path)->required();
    lab->add_option("--subject", subject, "Profile id, or acc:<p>");
    lab->add_option("--subjects-file", subjects_file);
    lab->add_option("--seed", seed);
    lab->add_option("--out", out)->required();

    // sample-transitions
    int n_transitions = 2000;
    auto* samp = app.add_subcommand("sample-transitions", "Random-walk transitions for the baseline fit");
    samp->add_option("--game", game_name)->check(CLI::IsMember({"wobble", "catch", "maze"}));
    samp->add_option("--map", map_path);
    samp->add_option("--n", n_transitions)->check(CLI::NonNegativeNumber);
    samp->add_option("--seed", seed);
    samp->add_option("--out", out)->required();

    // synth-epochs
    decoder::SyntheticEegConfig synth;
    int n_per_class = 200;
    auto* syn = app.add_subcommand("synth-epochs", "Write synthetic ErrP / non-ErrP epochs");
    syn->add_option("--n-per-class", n_per_class)->check(CLI::PositiveNumber);
    syn->add_option("--channels", synth.n_channels);
    syn->add_option("--fs", synth.fs);
    syn->add_option("--amplitude", synth.erp_amplitude);
    syn->add_option("--latency", synth.erp_latency);
    syn->add_option("--noise", synth.noise_sigma);
    syn->add_option("--tilt", synth.spectrum_tilt);
    syn->add_option("--drift", synth.drift_amplitude);
    syn->add_option("--seed", synth.seed);
    syn->add_option("--source-seed", synth.source_seed);
    syn->add_option("--out", out)->required();

    // train-decoder
    std::string train_path, model_path, test_path, report_list = "auc,sens,spec";
    decoder::DecoderParams dparams;
    auto* trd = app.add_subcommand("train-decoder", "Fit the Riemannian ErrP decoder");
    trd->add_option("--train", train_path)->required();
    trd->add_option("--nfilter", dparams.nfilter)->check(CLI::PositiveNumber);
    trd->add_option("--nelec", dparams.nelec, "Kept covariance dimensions (0: all)");
    trd->add_option("--lambda", dparams.net.lambda);
    trd->add_option("--l1-ratio", dparams.net.l1_ratio);
    trd->add_option("--rho", dparams.rho);
    trd->add_option("--out", out)->required();

    // eval-decoder
    auto* evd = app.add_subcommand("eval-decoder", "Score a decoder on an epoch file");
    evd->add_option("--model", model_path)->required();
    evd->add_option("--test", test_path)->required();
    evd->add_option("--report", report_list, "Comma list of auc,sens,spec,accuracy");
    evd->add_option("--out", out, "Also write the report as JSON");

    // learn-reward
    std::string labels_path, random_path, reward_mode = "soft-q";
    double alpha = 1.0, gamma = 0.9;
    int epochs = shaping::TrainConfig{}.epochs;
    auto* lr = app.add_subcommand("learn-reward", "Fit Q_h and the baseline (or the simple ensemble)");
    lr->add_option("--labels", labels_path)->required();
    lr->add_option("--random-transitions", random_path, "Extra transitions for the baseline fit");
    lr->add_option("--mode", reward_mode)->check(CLI::IsMember({"soft-q", "simple"}));
    lr->add_option("--alpha", alpha)->check(CLI::PositiveNumber);
    lr->add_option("--gamma", gamma)->check(CLI::Range(0.0, 1.0));
    lr->add_option("--epochs", epochs)->check(CLI::PositiveNumber);
    lr->add_option("--seed", seed);
    lr->add_option("--out", out)->required();

    // train-agent
    std::string agent_mode = "none", reward_path;
    int cap = agent::AgentConfig{}.episode_cap;
    bool no_baseline = false, no_beta = false;
    shaping::BetaSchedule schedule;
    auto* ta = app.add_subcommand("train-agent", "Train one BDQN agent");
    ta->add_option("--game", game_name)->check(CLI::IsMember({"wobble", "catch", "maze"}));
    ta->add_option("--map", map_path, "Maze layout (default: the reward file's map, else built-in)");
    ta->add_option("--mode", agent_mode)->check(CLI::IsMember({"none", "full", "shaped", "simple"}));
    ta->add_option("--reward", reward_path);
    ta->add_option("--subject", subject);
    ta->add_option("--subjects-file", subjects_file);
    ta->add_option("--seed", seed);
    ta->add_option("--cap", cap)->check(CLI::PositiveNumber);
    ta->add_option("--beta-a", schedule.a);
    ta->add_option("--beta-b", schedule.b);
    ta->add_flag("--no-baseline", no_baseline, "Drop t(s) from the auxiliary reward");
    ta->add_flag("--no-beta", no_beta, "Use a constant coefficient of 1");
    ta->add_option("--out", out)->required();

    // run / ablate / report / verify / decoder-report
    std::string config_path, dir, variant;
    auto* run = app.add_subcommand("run", "Run the experiment matrix of a config file");
    run->add_option("--config", config_path)->required();
    run->add_option("--out-dir", dir, "Override output_dir");
    auto* abl = app.add_subcommand("ablate", "Shaped paired with one ablation variant");
    abl->add_option("--config", config_path)->required();
    abl->add_option("--variant", variant)->required()->check(CLI::IsMember({"no_baseline", "no_beta", "simple"}));
    abl->add_option("--out-dir", dir, "Override the output directory");
    auto* rep = app.add_subcommand("report", "Rebuild metrics, curves and summary from runs.json");
    rep->add_option("--dir", dir)->required();
    auto* ver = app.add_subcommand("verify", "Check derived files against runs.json");
    ver->add_option("--dir", dir)->required();
    auto* dec = app.add_subcommand("decoder-report", "Cross-validation and transfer of the decoder");
    dec->add_option("--config", config_path, "Experiment config (decoder section)");
    dec->add_option("--out", out)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            const auto game = make_game(game_name, map_path);
            mcts::MctsConfig mc{c, mcts_gamma, k, max_steps, seed};
            const auto trajs = mcts::generate_trajectories(game, mc);
            json header = datafiles::game_fields(game);
            header.update({{"k", k}, {"c", c}, {"gamma", mcts_gamma}, {"max_steps", max_steps}, {"seed", seed}});
            datafiles::write_trajectories(out, game, trajs, header);
        } else if (*lab) {
            const auto th = datafiles::read_header(traj_path);
            const auto game = datafiles::game_from_header(th.fields);
            const auto trajs = datafiles::read_trajectories(traj_path, game);
            const auto profile = feedback::find_profile(profiles_from(subjects_file), subject);
            Rng rng = make_rng(seed, "label/" + profile.id);
            const auto data = feedback::label_trajectories(game, trajs, profile, rng);
            json header = datafiles::game_fields(game);
            header.update({{"subject", profile.id}, {"sens", profile.sens}, {"spec", profile.spec}, {"seed", seed},
                           {"trajectories", th.fields}});
            header["trajectories"].erase("map");
            datafiles::write_labels(out, game, data, header);
        } else if (*samp) {
            const auto game = make_game(game_name, map_path);
            Rng rng = make_rng(seed, "random");
            const auto set = feedback::sample_random_transitions(game, static_cast<std::size_t>(n_transitions), rng);
            json header = datafiles::game_fields(game);
            header.update({{"n", n_transitions}, {"seed", seed}});
            datafiles::write_transitions(out, game, set.transitions, header);
        } else if (*syn) {
            decoder::save_epochs(out, decoder::synth_epochs(synth, n_per_class));
        } else if (*trd) {
            decoder::save_model(decoder::train_decoder(decoder::load_epochs(train_path), dparams)).save(out);
        } else if (*evd) {
            const auto model = decoder::load_model(num::Checkpoint::load(model_path));
            const auto r = decoder::evaluate(model, decoder::load_epochs(test_path));
            const json all{{"auc", r.auc}, {"sens", r.sens}, {"spec", r.spec}, {"accuracy", r.accuracy}, {"n", r.n}};
            json chosen = json::object();
            std::stringstream ss(report_list);
            for (std::string key; std::getline(ss, key, ',');) {
                if (!all.contains(key)) throw std::invalid_argument("unknown report field '" + key + "'");
                chosen[key] = all[key];
                std::printf("%s %.4f\n", key.c_str(), all[key].get<double>());
            }
            if (!out.empty()) harness::write_text(out, harness::dump(chosen));
        } else if (*lr) {
            datafiles::Header lh;
            const auto probe = datafiles::read_header(labels_path);
            const auto game = datafiles::game_from_header(probe.fields);
            const auto data = datafiles::read_labels(labels_path, game, &lh);
            shaping::TrainConfig tc;
            tc.epochs = epochs;
            tc.seed = seed;
            num::Checkpoint ck;
            if (reward_mode == "simple") {
                ck = shaping::save_simple(game, shaping::fit_simple_baseline(game, data, tc));
            } else {
                const shaping::SoftQParams params{alpha, gamma};
                const auto q = shaping::fit_human_q(game, data, params, tc);
                auto transitions = feedback::label_transitions(game, data);
                if (!random_path.empty()) {
                    const auto extra = datafiles::read_transitions(random_path, game);
                    transitions.insert(transitions.end(), extra.begin(), extra.end());
                }
                const auto baseline = shaping::fit_baseline(game, q, transitions, params, tc);
                ck = shaping::save_soft_q(game, q, &baseline, params);
            }
            ck.put("label_count", std::vector<double>{static_cast<double>(data.size())});
            ck.put("subject", lh.fields.value("subject", std::string()));
            if (game.id() == envs::GameId::Maze) ck.put("map", game.maze_map().to_text());
            ck.save(out);
        } else if (*ta) {
            std::optional<num::Checkpoint> ck;
            if (!reward_path.empty()) ck = num::Checkpoint::load(reward_path);
            const auto id = envs::parse_game(game_name);
            const auto game = id != envs::GameId::Maze ? envs::Game::make(id)
                              : !map_path.empty()      ? envs::Game::make(id, envs::load_maze_file(map_path))
                              : ck && ck->contains("map") ? envs::Game::make(id, envs::load_maze(ck->text("map")))
                                                          : envs::Game::make(id, envs::default_maze());
            agent::TrainingSetup setup;
            setup.config.episode_cap = cap;
            setup.seed = seed;
            setup.subject = agent_mode == "none" ? "-" : subject;
            const shaping::BetaSchedule coeff = no_beta ? shaping::BetaSchedule::constant(1.0) : schedule;
            if (agent_mode == "none") {
                setup.mode = agent::NoFeedback{};
            } else if (agent_mode == "full") {
                setup.mode = agent::FullAccess{-1.0, feedback::find_profile(profiles_from(subjects_file), subject)};
            } else {
                if (!ck) throw std::invalid_argument("--mode " + agent_mode + " requires --reward");
                const auto loaded = shaping::load_reward(*ck, game);
                const long labels = ck->contains("label_count") ? static_cast<long>(ck->real("label_count")) : 0;
                if (ck->contains("subject") && !ck->text("subject").empty()) setup.subject = ck->text("subject");
                if (agent_mode == "shaped") {
                    if (!loaded.q) throw std::invalid_argument("shaped mode needs a soft-q reward file");
                    const shaping::BaselineModel* b = no_baseline || !loaded.baseline ? nullptr : &*loaded.baseline;
                    auto table = std::make_shared<const shaping::RewardTable>(
                        shaping::RewardTable::soft_q(game, *loaded.q, b, loaded.params.gamma));
                    setup.mode = agent::Shaped{table, coeff, labels};
                } else {
                    if (!loaded.ensemble) throw std::invalid_argument("simple mode needs a simple reward file");
                    auto table = std::make_shared<const shaping::RewardTable>(
                        shaping::RewardTable::simple(game, *loaded.ensemble));
                    setup.mode = agent::SimpleShaped{table, coeff, labels};
                }
            }
            const RunRecord rec = agent::run_training(game, setup);
            json doc = rec;
            doc["provenance"] = {{"mode", agent_mode},         {"seed", seed},       {"cap", cap},
                                 {"reward", reward_path},      {"no_baseline", no_baseline},
                                 {"no_beta", no_beta},         {"beta_a", coeff.a},
                                 {"beta_b", std::isinf(coeff.b) ? json(nullptr) : json(coeff.b)}};
            harness::write_text(out, harness::dump(doc));
            std::printf("complete_episode %d converged %d queries %ld\n", rec.complete_episode, rec.converged ? 1 : 0,
                        rec.queries);
        } else if (*run || *abl) {
            auto config = harness::load_config(config_path);
            const auto result = *run ? harness::run_experiment(config) : harness::ablate(config, variant);
            const std::string target = !dir.empty() ? dir : result.config.output_dir;
            harness::write_artifacts(result, target);
            std::cout << harness::summary_text(result.config, result.table);
        } else if (*rep) {
            const auto result = harness::report(dir);
            std::cout << harness::summary_text(result.config, result.table);
        } else if (*ver) {
            const auto problems = harness::verify(dir);
            print_problems(problems);
            if (!problems.empty()) return 1;
            std::puts("verify: ok");
        } else if (*dec) {
            const auto config = config_path.empty() ? harness::ExperimentConfig{} : harness::load_config(config_path);
            const auto summary = harness::run_decoder_experiment(config.decoder);
            harness::write_text(out, harness::dump(harness::decoder_document(config.decoder, summary)));
            std::printf("cv auc %.4f +- %.4f, transfer %.4f (in %.4f), morphology-shift transfer %.4f\n",
                        summary.cv.mean, summary.cv.std, summary.shifted.auc_transfer, summary.shifted.auc_in,
                        summary.morphology.auc_transfer);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
