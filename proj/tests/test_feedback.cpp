#include <doctest.h>

#include <cmath>
#include <set>

#include "ihf/feedback.hpp"
#include "ihf/mcts.hpp"

using namespace ihf;
using namespace ihf::envs;
using namespace ihf::feedback;

namespace {

std::vector<Trajectory> demos(const Game& game, int k, std::uint64_t seed) {
    return mcts::generate_trajectories(game, mcts::MctsConfig{0.5, 0.9, k, 0, seed});
}

std::size_t pair_count(const std::vector<Trajectory>& trajs) {
    std::size_t n = 0;
    for (const auto& t : trajs) n += t.transitions.size();
    return n;
}

}  // namespace

TEST_CASE("profiles") {
    const auto p = SubjectProfile::from_accuracy("x", 0.71);
    CHECK(p.sens == 0.71);
    CHECK(p.spec == 0.71);
    CHECK_THROWS(SubjectProfile{"bad", 1.2, 0.5}.validate());
    const auto all = builtin_profiles();
    CHECK(find_profile(all, "01").sens == doctest::Approx(0.80));
    CHECK(find_profile(all, "02").sens == doctest::Approx(0.71));
    CHECK(find_profile(all, "acc:0.6").spec == doctest::Approx(0.6));
    CHECK_THROWS(find_profile(all, "nobody"));
    const auto shipped = load_profiles(IHF_DATA_DIR "/subjects.json");
    for (const auto& b : all) CHECK(find_profile(shipped, b.id) == b);
}

TEST_CASE("noiseless channel reproduces ground truth") {
    const auto game = Game::maze(default_maze());
    const auto trajs = demos(game, 5, 1);
    Rng rng = make_rng(2);
    const auto data = label_trajectories(game, trajs, SubjectProfile{"p", 1.0, 1.0}, rng);
    REQUIRE(data.size() == pair_count(trajs));
    CHECK(count_queries(data) == static_cast<long>(pair_count(trajs)));
    std::size_t i = 0;
    for (std::size_t t = 0; t < trajs.size(); ++t) {
        for (const auto& tr : trajs[t].transitions) {
            const auto& l = data.labels[i++];
            CHECK(l.state == tr.state);
            CHECK(l.action == tr.action);
            CHECK(l.trajectory == static_cast<int>(t));
            CHECK(l.errp == !game.is_optimal(tr.state, tr.action));
        }
    }
}

TEST_CASE("channel calibration: flip rates match (1 - sens) and (1 - spec)") {
    const SubjectProfile p{"p", 0.8, 0.65};
    Rng rng = make_rng(3);
    constexpr int n = 20000;
    int miss = 0, false_alarm = 0;
    for (int i = 0; i < n; ++i) {
        miss += !emit_label(true, p, rng);
        false_alarm += emit_label(false, p, rng);
    }
    const double se_miss = std::sqrt(0.2 * 0.8 / n), se_fa = std::sqrt(0.35 * 0.65 / n);
    CHECK(std::abs(miss / double(n) - 0.2) < 3 * se_miss);
    CHECK(std::abs(false_alarm / double(n) - 0.35) < 3 * se_fa);
}

TEST_CASE("accuracy 0.71 over 10,000 labeled pairs") {
    const auto game = Game::maze(default_maze());
    std::vector<Trajectory> trajs;
    for (std::uint64_t s = 0; pair_count(trajs) < 10000; ++s)
        for (auto& t : demos(game, 20, s)) trajs.push_back(std::move(t));
    Rng rng = make_rng(4);
    const auto data = label_trajectories(game, trajs, SubjectProfile::from_accuracy("p", 0.71), rng);
    int agree = 0;
    for (const auto& l : data.labels) agree += l.errp == is_true_error(game, l.state, l.action);
    CHECK(std::abs(agree / double(data.size()) - 0.71) < 0.02);
}

TEST_CASE("flips are independent of position") {
    // 2x2 contingency of consecutive flips; chi-square with 1 dof at alpha = 0.01.
    const SubjectProfile p = SubjectProfile::from_accuracy("p", 0.7);
    Rng rng = make_rng(5);
    double table[2][2] = {{0, 0}, {0, 0}};
    bool prev = !emit_label(true, p, rng);
    for (int i = 0; i < 20000; ++i) {
        const bool flip = !emit_label(true, p, rng);
        table[prev][flip] += 1;
        prev = flip;
    }
    const double total = table[0][0] + table[0][1] + table[1][0] + table[1][1];
    double chi2 = 0.0;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
            const double e = (table[r][0] + table[r][1]) * (table[0][c] + table[1][c]) / total;
            chi2 += (table[r][c] - e) * (table[r][c] - e) / e;
        }
    CHECK(chi2 < 6.635);
}

TEST_CASE("random transitions") {
    const auto game = Game::maze(default_maze());
    Rng rng = make_rng(6);
    CHECK(sample_random_transitions(game, 0, rng).transitions.empty());
    const auto set = sample_random_transitions(game, 2000, rng);
    REQUIRE(set.transitions.size() == 2000);
    for (const auto& t : set.transitions) CHECK(t == game.step(t.state, t.action));

    int reachable = 0;
    for (int i = 0; i < game.state_count(); ++i) {
        const auto s = game.state_at(i);
        reachable += game.is_valid(s) && game.maze_distance(std::get<MazeState>(s).agent) > 0;
    }
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng r = make_rng(seed, "random");
        std::set<std::string> seen;
        for (const auto& t : sample_random_transitions(game, 2000, r).transitions) seen.insert(game.serialize(t.state));
        CHECK(static_cast<double>(seen.size()) >= 0.9 * reachable);
    }
}

TEST_CASE("full-access channel counts every query") {
    const auto game = Game::maze(default_maze());
    FeedbackChannel ch(game, SubjectProfile{"p", 1.0, 1.0}, make_rng(7));
    const GameState s = MazeState{default_maze().start};
    for (int a = 0; a < 4; ++a) CHECK(ch.query(s, ActionId{a}) == !game.is_optimal(s, ActionId{a}));
    CHECK(ch.calls() == 4);
}

TEST_CASE("query accounting") {
    RunRecord r;
    r.env_steps = 2130;
    r.queries = 361;
    CHECK(count_queries(QueryMode::FullAccess, r) == 2130);
    CHECK(count_queries(QueryMode::Shaped, r) == 361);
    CHECK(count_queries(LabeledDataset{}) == 0);

    // Twenty maze demonstrations: a few hundred labels.
    const auto game = Game::maze(default_maze());
    Rng rng = make_rng(8);
    const auto data = label_trajectories(game, demos(game, 20, 0), find_profile(builtin_profiles(), "05"), rng);
    CHECK(data.size() >= 100);
    CHECK(data.size() <= 4000);

    const auto tr = label_transitions(game, data);
    REQUIRE(tr.size() == data.size());
    for (std::size_t i = 0; i < tr.size(); ++i) CHECK(tr[i] == game.step(data.labels[i].state, data.labels[i].action));
}
