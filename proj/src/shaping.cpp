#include "ihf/shaping.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <tuple>

namespace ihf::shaping {

using envs::ActionId;
using envs::Game;
using envs::GameState;
using num::Matrix;
using num::Vector;

namespace {

/// One-hot encodings of a set of distinct states, one column each.
class StateBatch {
public:
    explicit StateBatch(const Game& game) : game_(&game), column_(static_cast<std::size_t>(game.state_count()), -1) {}

    int add(const GameState& s) {
        const auto idx = static_cast<std::size_t>(game_->state_index(s));
        if (column_[idx] < 0) {
            column_[idx] = static_cast<int>(states_.size());
            states_.push_back(s);
        }
        return column_[idx];
    }

    Matrix inputs() const {
        Matrix x(game_->encoding_size(), static_cast<Eigen::Index>(states_.size()));
        for (std::size_t c = 0; c < states_.size(); ++c) game_->encode_into(states_[c], x.col(static_cast<Eigen::Index>(c)).data());
        return x;
    }

    Eigen::Index size() const { return static_cast<Eigen::Index>(states_.size()); }

private:
    const Game* game_;
    std::vector<int> column_;
    std::vector<GameState> states_;
};

Matrix softmax_columns(const Matrix& q, double alpha) {
    Matrix pi(q.rows(), q.cols());
    for (Eigen::Index c = 0; c < q.cols(); ++c) pi.col(c) = soft_policy(q.col(c), alpha).pi;
    return pi;
}

void check_compatible(const Game& game, const num::Mlp& net, int outputs, const char* what) {
    if (net.input_size() != game.encoding_size() || net.output_size() != outputs)
        throw std::invalid_argument(std::string(what) + ": network shape does not match the game");
}

std::vector<int> layer_sizes(int input, const std::vector<int>& hidden, int output) {
    std::vector<int> sizes{input};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(output);
    return sizes;
}

double sign(double x) { return x > 0.0 ? 1.0 : x < 0.0 ? -1.0 : 0.0; }

double sigmoid(double z) {
    return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

}  // namespace

SoftPolicy soft_policy(const Vector& q, double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("soft_policy: alpha must be positive");
    if (q.size() == 0) throw std::invalid_argument("soft_policy: empty action set");
    const double m = q.maxCoeff();
    const Vector e = ((q.array() - m) / alpha).exp();
    const double sum = e.sum();
    SoftPolicy out;
    out.value = m + alpha * std::log(sum);
    out.pi = e / sum;
    return out;
}

Vector HumanQModel::q_values(const Game& game, const GameState& s) const { return net.forward(game.encode(s)); }

double BaselineModel::value(const Game& game, const GameState& s) const { return net.forward(game.encode(s))(0); }

double j1_per_sample(const Game& game, const HumanQModel& model, const feedback::LabeledDataset& data) {
    if (data.empty()) throw std::invalid_argument("j1: empty dataset");
    double j = 0.0;
    for (const auto& l : data.labels) {
        const double p = soft_policy(model.q_values(game, l.state), model.alpha).pi(l.action.index);
        j += l.errp ? 1.0 - p : p;
    }
    return j / static_cast<double>(data.size());
}

HumanQModel fit_human_q(const Game& game, const feedback::LabeledDataset& data, const SoftQParams& params,
                        const TrainConfig& config, FitReport* report) {
    if (data.empty()) throw std::invalid_argument("fit_human_q: empty dataset");
    if (!(params.alpha > 0.0)) throw std::invalid_argument("fit_human_q: alpha must be positive");

    const int actions = game.num_actions();
    StateBatch batch(game);
    std::vector<std::tuple<int, int, bool>> labels;
    for (const auto& l : data.labels) labels.emplace_back(batch.add(l.state), l.action.index, l.errp);

    // J1 = sum_{s,a} w(s,a) pi(a|s) + (#ErrP labels), with w = #nonErrP - #ErrP.
    Matrix w = Matrix::Zero(actions, batch.size());
    double errp_count = 0.0;
    for (const auto& [col, a, errp] : labels) {
        w(a, col) += errp ? -1.0 : 1.0;
        errp_count += errp ? 1.0 : 0.0;
    }
    const Matrix x = batch.inputs();
    const double n = static_cast<double>(data.size());

    Rng rng = make_rng(config.seed, "human-q");
    HumanQModel model{num::Mlp::glorot(layer_sizes(game.encoding_size(), config.hidden, actions), rng),
                      params.alpha};
    num::AdamState adam(model.net, config.adam);
    num::Mlp::Cache cache;

    auto objective = [&](const Matrix& pi) { return (w.cwiseProduct(pi).sum() + errp_count) / n; };

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const Matrix q = model.net.forward_batch(x, cache);
        const Matrix pi = softmax_columns(q, params.alpha);
        if (report) report->history.push_back(objective(pi));

        // dJ1/dQ(b,s) = sum_a w(a,s) pi_a (delta_ab - pi_b) / alpha
        const Matrix v = w.cwiseProduct(pi);
        Matrix grad_q = v - pi * v.colwise().sum().asDiagonal();
        grad_q /= params.alpha;
        // Ascent on J1 == descent on -J1/n.
        const num::MlpGradients g = model.net.backward(cache, -grad_q / n);
        num::adam_step(model.net, g, adam);
    }
    if (report) report->final_objective = objective(softmax_columns(model.net.forward_batch(x), params.alpha));
    return model;
}

double residual(const Game& game, const HumanQModel& q, const BaselineModel* baseline, const envs::Transition& tr,
                double gamma) {
    return aux_reward(game, q, baseline, tr.state, tr.action, tr.next_state, tr.terminal, gamma);
}

double j2_per_sample(const Game& game, const HumanQModel& q, const BaselineModel* baseline,
                     const std::vector<envs::Transition>& transitions, double gamma) {
    if (transitions.empty()) throw std::invalid_argument("j2: empty transition set");
    double acc = 0.0;
    for (const auto& tr : transitions) acc += std::abs(residual(game, q, baseline, tr, gamma));
    return acc / static_cast<double>(transitions.size());
}

BaselineModel fit_baseline(const Game& game, const HumanQModel& q, const std::vector<envs::Transition>& transitions,
                           const SoftQParams& params, const TrainConfig& config, FitReport* report) {
    if (transitions.empty()) throw std::invalid_argument("fit_baseline: empty transition set");
    check_compatible(game, q.net, game.num_actions(), "fit_baseline");

    // Collapse repeated transitions: residual = c + t(s) - gamma * t(s') * [s' non-terminal],
    // with c = Q(s,a) - gamma * max Q(s') frozen.
    StateBatch batch(game);
    struct Key {
        int s, a, next;
        bool terminal;
        auto operator<=>(const Key&) const = default;
    };
    std::map<Key, double> counts;
    for (const auto& tr : transitions) {
        const int s = batch.add(tr.state);
        const int next = tr.terminal ? -1 : batch.add(tr.next_state);
        counts[Key{s, tr.action.index, next, tr.terminal}] += 1.0;
    }
    const Matrix x = batch.inputs();
    const Matrix qx = q.net.forward_batch(x);

    struct Term {
        int s, next;
        double c, count;
    };
    std::vector<Term> terms;
    terms.reserve(counts.size());
    for (const auto& [key, count] : counts) {
        const double succ = key.terminal ? 0.0 : qx.col(key.next).maxCoeff();
        terms.push_back({key.s, key.next, qx(key.a, key.s) - params.gamma * succ, count});
    }
    const double n = static_cast<double>(transitions.size());

    Rng rng = make_rng(config.seed, "baseline");
    BaselineModel model{num::Mlp::glorot(layer_sizes(game.encoding_size(), config.hidden, 1), rng)};
    num::AdamState adam(model.net, config.adam);
    num::Mlp::Cache cache;

    auto loss_of = [&](const Matrix& t) {
        double loss = 0.0;
        for (const auto& term : terms) {
            const double r = term.c + t(0, term.s) - (term.next >= 0 ? params.gamma * t(0, term.next) : 0.0);
            loss += term.count * std::abs(r);
        }
        return loss / n;
    };

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const Matrix t = model.net.forward_batch(x, cache);
        Matrix grad = Matrix::Zero(1, batch.size());
        double loss = 0.0;
        for (const auto& term : terms) {
            const double r = term.c + t(0, term.s) - (term.next >= 0 ? params.gamma * t(0, term.next) : 0.0);
            loss += term.count * std::abs(r);
            const double g = term.count * sign(r) / n;
            grad(0, term.s) += g;
            if (term.next >= 0) grad(0, term.next) -= params.gamma * g;
        }
        if (report) report->history.push_back(loss / n);
        num::adam_step(model.net, model.net.backward(cache, grad), adam);
    }
    if (report) report->final_objective = loss_of(model.net.forward_batch(x));
    return model;
}

double aux_reward(const Game& game, const HumanQModel& q, const BaselineModel* baseline, const GameState& s,
                  ActionId a, const GameState& s_next, bool terminal, double gamma) {
    const double t_s = baseline ? baseline->value(game, s) : 0.0;
    double r = q.q_values(game, s)(a.index) + t_s;
    if (!terminal) {
        const double t_next = baseline ? baseline->value(game, s_next) : 0.0;
        r -= gamma * (q.q_values(game, s_next).maxCoeff() + t_next);
    }
    return r;
}

void BetaSchedule::validate() const {
    if (a < 0.0 || !(b > 0.0)) throw std::invalid_argument("beta schedule requires a >= 0 and b > 0");
}

double beta(const BetaSchedule& schedule, int episode) {
    if (episode < 0) throw std::invalid_argument("beta: episode must be non-negative");
    return schedule.a * std::exp(-static_cast<double>(episode) / schedule.b);
}

double BootstrapEnsemble::errp_probability(const Game& game, const GameState& s, ActionId a) const {
    if (heads.empty()) throw std::logic_error("ensemble has no heads");
    const Vector x = game.encode(s);
    double p = 0.0;
    for (const auto& h : heads) p += sigmoid(h.forward(x)(a.index));
    return p / static_cast<double>(heads.size());
}

BootstrapEnsemble fit_simple_baseline(const Game& game, const feedback::LabeledDataset& data,
                                      const TrainConfig& config) {
    if (data.empty()) throw std::invalid_argument("fit_simple_baseline: empty dataset");
    const int actions = game.num_actions();

    StateBatch batch(game);
    std::vector<std::tuple<int, int, bool>> labels;
    for (const auto& l : data.labels) labels.emplace_back(batch.add(l.state), l.action.index, l.errp);
    const Matrix x = batch.inputs();
    const double n = static_cast<double>(labels.size());

    BootstrapEnsemble ensemble;
    Rng resample_rng = make_rng(config.seed, "simple-bootstrap");
    std::uniform_int_distribution<std::size_t> pick(0, labels.size() - 1);
    for (int h = 0; h < BootstrapEnsemble::kHeads; ++h) {
        Matrix count = Matrix::Zero(actions, batch.size());
        Matrix positive = Matrix::Zero(actions, batch.size());
        for (std::size_t i = 0; i < labels.size(); ++i) {
            const auto& [col, a, errp] = labels[pick(resample_rng)];
            count(a, col) += 1.0;
            positive(a, col) += errp ? 1.0 : 0.0;
        }

        Rng init_rng = make_rng(config.seed, "simple-head-" + std::to_string(h));
        num::Mlp net = num::Mlp::glorot(layer_sizes(game.encoding_size(), config.hidden, actions), init_rng);
        num::AdamState adam(net, config.adam);
        num::Mlp::Cache cache;
        for (int epoch = 0; epoch < config.epochs; ++epoch) {
            const Matrix z = net.forward_batch(x, cache);
            // d(BCE)/dz = count * sigmoid(z) - positives, over the labeled entries.
            const Matrix p = z.unaryExpr([](double v) { return sigmoid(v); });
            const Matrix grad = (count.cwiseProduct(p) - positive) / n;
            num::adam_step(net, net.backward(cache, grad), adam);
        }
        ensemble.heads.push_back(std::move(net));
    }
    return ensemble;
}

RewardTable RewardTable::soft_q(const Game& game, const HumanQModel& q, const BaselineModel* baseline, double gamma) {
    check_compatible(game, q.net, game.num_actions(), "RewardTable");
    if (baseline) check_compatible(game, baseline->net, 1, "RewardTable");
    RewardTable rt;
    rt.game_ = &game;
    rt.gamma_ = gamma;
    Matrix x(game.encoding_size(), game.state_count());
    std::vector<bool> valid(static_cast<std::size_t>(game.state_count()));
    for (int i = 0; i < game.state_count(); ++i) {
        const GameState s = game.state_at(i);
        valid[static_cast<std::size_t>(i)] = game.is_valid(s);
        if (valid[static_cast<std::size_t>(i)]) game.encode_into(s, x.col(i).data());
        else x.col(i).setZero();
    }
    rt.table_ = q.net.forward_batch(x);
    if (baseline) rt.table_.rowwise() += baseline->net.forward_batch(x).row(0);
    for (int i = 0; i < game.state_count(); ++i)
        if (!valid[static_cast<std::size_t>(i)]) rt.table_.col(i).setZero();
    rt.best_ = rt.table_.colwise().maxCoeff().transpose();
    return rt;
}

RewardTable RewardTable::simple(const Game& game, const BootstrapEnsemble& ensemble) {
    RewardTable rt;
    rt.game_ = &game;
    rt.simple_ = true;
    rt.table_ = Matrix::Zero(game.num_actions(), game.state_count());
    for (int i = 0; i < game.state_count(); ++i) {
        const GameState s = game.state_at(i);
        if (!game.is_valid(s)) continue;
        for (int a = 0; a < game.num_actions(); ++a)
            rt.table_(a, i) = ensemble.predicts_errp(game, s, ActionId{a}) ? -1.0 : 0.0;
    }
    rt.best_ = rt.table_.colwise().maxCoeff().transpose();
    return rt;
}

double RewardTable::operator()(const GameState& s, ActionId a, const GameState& s_next, bool terminal) const {
    const double here = table_(a.index, game_->state_index(s));
    if (simple_) return here;
    return terminal ? here : here - gamma_ * best_(game_->state_index(s_next));
}

double RewardTable::operator()(const envs::Transition& tr) const {
    return (*this)(tr.state, tr.action, tr.next_state, tr.terminal);
}

num::Checkpoint save_soft_q(const Game& game, const HumanQModel& q, const BaselineModel* baseline,
                            const SoftQParams& params) {
    num::Checkpoint ck;
    ck.put("kind", std::string("soft-q"));
    ck.put("game", std::string(envs::game_name(game.id())));
    ck.put("alpha", std::vector<double>{params.alpha});
    ck.put("gamma", std::vector<double>{params.gamma});
    ck.put("q_net", q.net);
    if (baseline) ck.put("baseline_net", baseline->net);
    return ck;
}

num::Checkpoint save_simple(const Game& game, const BootstrapEnsemble& ensemble) {
    num::Checkpoint ck;
    ck.put("kind", std::string("simple"));
    ck.put("game", std::string(envs::game_name(game.id())));
    for (std::size_t h = 0; h < ensemble.heads.size(); ++h) ck.put("head" + std::to_string(h), ensemble.heads[h]);
    return ck;
}

LoadedReward load_reward(const num::Checkpoint& ck, const Game& game) {
    if (ck.text("game") != envs::game_name(game.id()))
        throw std::invalid_argument("reward checkpoint was trained for game '" + ck.text("game") + "'");
    LoadedReward out;
    const std::string& kind = ck.text("kind");
    if (kind == "soft-q") {
        out.params = SoftQParams{ck.real("alpha"), ck.real("gamma")};
        out.q = HumanQModel{ck.network("q_net"), out.params.alpha};
        check_compatible(game, out.q->net, game.num_actions(), "load_reward");
        if (ck.contains("baseline_net")) {
            out.baseline = BaselineModel{ck.network("baseline_net")};
            check_compatible(game, out.baseline->net, 1, "load_reward");
        }
    } else if (kind == "simple") {
        BootstrapEnsemble ens;
        for (int h = 0; h < BootstrapEnsemble::kHeads; ++h) {
            ens.heads.push_back(ck.network("head" + std::to_string(h)));
            check_compatible(game, ens.heads.back(), game.num_actions(), "load_reward");
        }
        out.ensemble = std::move(ens);
    } else {
        throw std::invalid_argument("unknown reward checkpoint kind '" + kind + "'");
    }
    return out;
}

}  // namespace ihf::shaping
