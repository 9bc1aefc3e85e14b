#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <sstream>

#include "ihf/harness.hpp"

using namespace ihf;
using namespace ihf::harness;
namespace fs = std::filesystem;

namespace {

ExperimentConfig tiny(std::vector<std::string> modes) {
    ExperimentConfig c;
    c.subjects = {"01"};
    c.modes = std::move(modes);
    c.k = {3};
    c.seeds = {0, 1};
    c.random_transitions = 100;
    c.reward_training.epochs = 30;
    c.reward_training.hidden = {8};
    c.agent.episode_cap = 60;
    return c;
}

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("ihf_test_" + name);
    fs::remove_all(p);
    return p;
}

RunRecord fake(const std::string& mode, const std::string& subject, int k, std::uint64_t seed, int episodes,
               long steps, long queries) {
    RunRecord r;
    r.game = "maze";
    r.mode = mode;
    r.subject = subject;
    r.k = k;
    r.seed = seed;
    r.episode_cap = 100;
    r.wins.assign(static_cast<std::size_t>(episodes), 1);
    r.episode_steps.assign(static_cast<std::size_t>(episodes), 0);
    r.episode_steps.back() = static_cast<int>(steps);
    r.success_curve = success_curve(r.wins);
    r.complete_episode = episodes;
    r.converged = true;
    r.env_steps = steps;
    r.queries = queries;
    return r;
}

}  // namespace

TEST_CASE("config round trip and strict keys") {
    ExperimentConfig c = tiny({"none", "shaped", "no_beta"});
    c.beta = shaping::BetaSchedule::constant(1.5);
    const nlohmann::json j = c;
    const auto back = j.get<ExperimentConfig>();
    CHECK(nlohmann::json(back) == j);
    CHECK(std::isinf(back.beta.b));

    auto bad = j;
    bad["sedes"] = {1};
    CHECK_THROWS_AS(bad.get<ExperimentConfig>(), std::invalid_argument);
    auto bad_nested = j;
    bad_nested["agent"]["gama"] = 0.5;
    CHECK_THROWS_AS(bad_nested.get<ExperimentConfig>(), std::invalid_argument);

    auto unknown_mode = c;
    unknown_mode.modes = {"shapd"};
    CHECK_THROWS_AS(unknown_mode.validate(), std::invalid_argument);
    const auto shipped = load_config(IHF_SOURCE_DIR "/configs/maze_full.json");
    CHECK(shipped.modes.size() == kModes.size());
    CHECK(shipped.seeds.size() == 10);
}

TEST_CASE("parallel_for runs every task and rethrows the lowest failing index") {
    std::vector<int> hit(50, 0);
    parallel_for(hit.size(), 4, [&](std::size_t i) { hit[i] += 1; });
    CHECK(std::all_of(hit.begin(), hit.end(), [](int h) { return h == 1; }));

    std::atomic<int> ran{0};
    try {
        parallel_for(20, 3, [&](std::size_t i) {
            ++ran;
            if (i == 7 || i == 13) throw std::runtime_error("task " + std::to_string(i));
        });
        FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()) == "task 7");
    }
    CHECK(ran == 20);
}

TEST_CASE("metrics: speedup, reduction, population std") {
    std::vector<RunRecord> runs = {fake("none", "-", 0, 0, 40, 400, 0), fake("none", "-", 0, 1, 60, 600, 0),
                                   fake("full", "01", 0, 0, 40, 1000, 1000), fake("full", "01", 0, 1, 40, 1000, 1000),
                                   fake("shaped", "01", 20, 0, 25, 300, 250), fake("shaped", "01", 20, 1, 25, 300, 250)};
    const auto table = compute_metrics(runs);
    REQUIRE(table.size() == 3);
    CHECK(table[0].mode == "none");
    CHECK(table[0].complete_mean == 50.0);
    CHECK(table[0].complete_std == 10.0);
    CHECK(*table[0].speedup == 1.0);
    CHECK(table[1].mode == "full");
    CHECK(*table[1].speedup == doctest::Approx(1.25));
    CHECK(*table[1].reduction == 0.0);
    CHECK(table[2].mode == "shaped");
    CHECK(table[2].complete_std == 0.0);
    CHECK(*table[2].speedup == doctest::Approx(2.0));
    CHECK(*table[2].reduction == doctest::Approx(0.75));

    CHECK(format_percent(0.755555) == "75.56%");
    CHECK(format_percent(0.7) == "70.00%");
    ExperimentConfig c = tiny({"none", "full", "shaped"});
    c.k = {20};
    const auto text = summary_text(c, table);
    CHECK(text.find("75.00%") != std::string::npos);
    CHECK(text.find("2.00x") != std::string::npos);
    CHECK(text.find("Average number of queries") != std::string::npos);
    CHECK(text.find("seeds: 0 1") != std::string::npos);
}

TEST_CASE("curves: one row per episode, padded, zero std where seeds agree") {
    std::vector<RunRecord> runs = {fake("none", "-", 0, 0, 34, 10, 0), fake("none", "-", 0, 1, 36, 10, 0)};
    const auto band = aggregate_curves({&runs[0], &runs[1]});
    REQUIRE(band.mean.size() == 36);
    CHECK(band.std[0] == 0.0);
    CHECK(band.mean.back() == 1.0);

    ExperimentConfig c = tiny({"none"});
    const auto plots = emit_plots(c, {runs[0]});
    REQUIRE(plots.size() == 1);
    std::istringstream in(plots[0].contents);
    std::string line;
    std::getline(in, line);
    CHECK(line.rfind("# config: ", 0) == 0);
    std::getline(in, line);
    CHECK(line == "episode,none_mean,none_std");
    int rows = 0, last = 0;
    while (std::getline(in, line)) {
        const int ep = std::stoi(line.substr(0, line.find(',')));
        CHECK(ep == last + 1);
        last = ep;
        ++rows;
    }
    CHECK(rows == 34);
}

TEST_CASE("run_experiment: NoFeedback only") {
    const auto result = run_experiment(tiny({"none"}), 2);
    REQUIRE(result.runs.size() == 2);
    REQUIRE(result.table.size() == 1);
    CHECK(result.table[0].mode == "none");
    CHECK(*result.table[0].speedup == 1.0);
    for (const auto& r : result.runs) CHECK(r.queries == 0);
}

TEST_CASE("run_experiment: fixed order, isolation, determinism, artifacts") {
    auto c = tiny({"none", "full", "shaped", "no_baseline", "no_beta", "simple"});
    const auto a = run_experiment(c, 1);
    const auto b = run_experiment(c, 3);
    CHECK(a.runs == b.runs);
    // none x2 seeds, full x2, then 4 reward modes per (subject, K, seed)
    REQUIRE(a.runs.size() == 12);
    CHECK(a.runs[0].mode == "none");
    CHECK(a.runs[2].mode == "full");
    CHECK(a.runs[4].mode == "shaped");
    CHECK(a.runs[5].mode == "no_baseline");
    CHECK(a.runs[6].mode == "no_beta");
    CHECK(a.runs[7].mode == "simple");
    const long labels = a.runs[4].queries;
    CHECK(labels > 0);
    for (std::size_t i = 4; i < 8; ++i) CHECK(a.runs[i].queries == labels);
    for (std::size_t i = 2; i < 4; ++i) CHECK(a.runs[i].queries == a.runs[i].env_steps);

    const auto d1 = scratch("a"), d2 = scratch("b");
    write_artifacts(a, d1);
    write_artifacts(b, d2);
    for (const auto& e : fs::directory_iterator(d1)) {
        CHECK(read_text(e.path()) == read_text(d2 / e.path().filename()));
        CHECK(read_text(e.path()).find("\"seeds\"") != std::string::npos);
    }
    CHECK(verify(d1).empty());
    report(d1);
    CHECK(verify(d1).empty());

    // Tampering with any derived file is reported.
    const auto summary = read_text(d1 / "summary.txt");
    write_text(d1 / "summary.txt", summary + "x");
    CHECK_FALSE(verify(d1).empty());
    write_text(d1 / "summary.txt", summary);
    auto runs = nlohmann::json::parse(read_text(d1 / "runs.json"));
    runs["runs"][0]["env_steps"] = 1;
    write_text(d1 / "runs.json", dump(runs));
    CHECK_FALSE(verify(d1).empty());
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST_CASE("ablate pairs the shaped run with one variant") {
    const auto r = ablate(tiny({"none"}), "no_beta", 2);
    REQUIRE(r.runs.size() == 4);
    CHECK(r.config.modes == std::vector<std::string>{"shaped", "no_beta"});
    CHECK(r.config.output_dir.find("ablate_no_beta") != std::string::npos);
    CHECK_THROWS(ablate(tiny({"none"}), "nonsense", 1));
}

TEST_CASE("errors carry run context") {
    auto c = tiny({"shaped"});
    c.subjects = {"no-such-subject"};
    CHECK_THROWS(run_experiment(c, 1));
}
