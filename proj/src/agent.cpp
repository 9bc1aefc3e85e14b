#include "ihf/agent.hpp"

#include <stdexcept>

namespace ihf::agent {

using envs::ActionId;
using envs::GameState;
using num::Matrix;
using num::Vector;

std::string mode_name(const RewardMode& mode) {
    struct Visitor {
        std::string operator()(const NoFeedback&) const { return "none"; }
        std::string operator()(const FullAccess&) const { return "full"; }
        std::string operator()(const Shaped&) const { return "shaped"; }
        std::string operator()(const SimpleShaped&) const { return "simple"; }
    };
    return std::visit(Visitor{}, mode);
}

double shape_reward(const RewardMode& mode, const envs::Transition& tr, int episode,
                    feedback::FeedbackChannel* channel) {
    if (const auto* full = std::get_if<FullAccess>(&mode)) {
        if (!channel) throw std::invalid_argument("shape_reward: full access requires a feedback channel");
        return tr.reward + (channel->query(tr.state, tr.action) ? full->penalty : 0.0);
    }
    if (const auto* shaped = std::get_if<Shaped>(&mode))
        return tr.reward + shaping::beta(shaped->schedule, episode) * (*shaped->aux)(tr);
    if (const auto* simple = std::get_if<SimpleShaped>(&mode))
        return tr.reward + shaping::beta(simple->schedule, episode) * (*simple->penalty)(tr);
    return tr.reward;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
    items_.reserve(capacity);
}

void ReplayBuffer::push(StoredTransition t) {
    if (items_.size() < capacity_) {
        items_.push_back(std::move(t));
        return;
    }
    items_[head_] = std::move(t);
    head_ = (head_ + 1) % capacity_;
}

const StoredTransition& ReplayBuffer::at(std::size_t i) const {
    if (i >= items_.size()) throw std::out_of_range("ReplayBuffer::at");
    return items_[(head_ + i) % items_.size()];
}

std::size_t ReplayBuffer::sample_index(Rng& rng) const {
    if (items_.empty()) throw std::logic_error("ReplayBuffer: sampling from an empty buffer");
    return std::uniform_int_distribution<std::size_t>(0, items_.size() - 1)(rng);
}

std::vector<const StoredTransition*> ReplayBuffer::sample(std::size_t n, Rng& rng) const {
    std::vector<const StoredTransition*> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(&items_[sample_index(rng)]);
    return out;
}

BdqnAgent::BdqnAgent(const envs::Game& game, AgentConfig config, std::uint64_t seed)
    : game_(&game), config_(std::move(config)), rng_(make_rng(seed, "agent")),
      replay_(static_cast<std::size_t>(config_.replay_capacity)) {
    std::vector<int> sizes{game.encoding_size()};
    sizes.insert(sizes.end(), config_.hidden.begin(), config_.hidden.end());
    sizes.push_back(config_.feature_dim);
    Rng init = make_rng(seed, "agent-init");
    features_ = num::Mlp::glorot(sizes, init, num::Activation::Relu);
    target_features_ = features_;
    adam_ = num::AdamState(features_, config_.adam);

    const int actions = game.num_actions();
    posteriors_.assign(static_cast<std::size_t>(actions),
                       num::BayesLinReg::prior(config_.feature_dim, config_.prior_var, config_.noise_var));
    for (const auto& p : posteriors_) factors_.push_back(num::blr_factor(p));
    mean_weights_ = Matrix::Zero(actions, config_.feature_dim);
    target_weights_ = mean_weights_;
    sampled_ = mean_weights_;
}

Vector BdqnAgent::phi(const GameState& s) const { return features_.forward(game_->encode(s)); }

Vector BdqnAgent::q_values(const GameState& s) const { return sampled_ * phi(s); }

Vector BdqnAgent::q_mean_values(const GameState& s) const { return mean_weights_ * phi(s); }

ActionId BdqnAgent::act(const GameState& s) const {
    const Vector q = q_values(s);
    Eigen::Index best = 0;
    for (Eigen::Index a = 1; a < q.size(); ++a)
        if (q(a) > q(best)) best = a;
    return ActionId{static_cast<int>(best)};
}

void BdqnAgent::resample_weights() {
    for (std::size_t a = 0; a < posteriors_.size(); ++a)
        sampled_.row(static_cast<Eigen::Index>(a)) = num::blr_sample(posteriors_[a], factors_[a], rng_).transpose();
}

void BdqnAgent::use_posterior_means() { sampled_ = mean_weights_; }

Matrix BdqnAgent::encode_batch(const std::vector<const StoredTransition*>& batch, bool next) const {
    Matrix x(game_->encoding_size(), static_cast<Eigen::Index>(batch.size()));
    for (std::size_t i = 0; i < batch.size(); ++i)
        game_->encode_into(next ? batch[i]->next_state : batch[i]->state, x.col(static_cast<Eigen::Index>(i)).data());
    return x;
}

Vector BdqnAgent::targets(const std::vector<const StoredTransition*>& batch) const {
    const Matrix phi_next = target_features_.forward_batch(encode_batch(batch, true));
    const Matrix q_next = target_weights_ * phi_next;
    Vector y(static_cast<Eigen::Index>(batch.size()));
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto c = static_cast<Eigen::Index>(i);
        y(c) = batch[i]->reward + (batch[i]->terminal ? 0.0 : config_.gamma * q_next.col(c).maxCoeff());
    }
    return y;
}

void BdqnAgent::train_step(const std::vector<const StoredTransition*>& batch) {
    if (batch.empty()) throw std::invalid_argument("train_step: empty batch");
    const Vector y = targets(batch);
    num::Mlp::Cache cache;
    const Matrix phi_s = features_.forward_batch(encode_batch(batch, false), cache);
    Matrix upstream(phi_s.rows(), phi_s.cols());
    const double scale = 2.0 / static_cast<double>(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto c = static_cast<Eigen::Index>(i);
        const auto w = mean_weights_.row(batch[i]->action.index);
        const double err = w.dot(phi_s.col(c)) - y(c);
        upstream.col(c) = scale * err * w.transpose();
    }
    num::adam_step(features_, features_.backward(cache, upstream), adam_);
}

void BdqnAgent::refresh_posteriors() {
    const std::size_t n = replay_.size();
    if (n == 0) return;

    // The replay holds few distinct states, so featurise each one once.
    std::vector<int> column(static_cast<std::size_t>(game_->state_count()), -1);
    std::vector<int> state_ids;
    auto column_of = [&](const GameState& s) {
        const auto idx = static_cast<std::size_t>(game_->state_index(s));
        if (column[idx] < 0) {
            column[idx] = static_cast<int>(state_ids.size());
            state_ids.push_back(static_cast<int>(idx));
        }
        return column[idx];
    };
    std::vector<int> s_col(n), next_col(n);
    for (std::size_t i = 0; i < n; ++i) {
        s_col[i] = column_of(replay_.at(i).state);
        next_col[i] = column_of(replay_.at(i).next_state);
    }
    Matrix x(game_->encoding_size(), static_cast<Eigen::Index>(state_ids.size()));
    for (std::size_t c = 0; c < state_ids.size(); ++c)
        game_->encode_into(game_->state_at(state_ids[c]), x.col(static_cast<Eigen::Index>(c)).data());
    const Matrix phi_all = features_.forward_batch(x);
    const Vector next_value = (target_weights_ * target_features_.forward_batch(x)).colwise().maxCoeff().transpose();

    const int actions = game_->num_actions();
    std::vector<std::vector<std::size_t>> by_action(static_cast<std::size_t>(actions));
    for (std::size_t i = 0; i < n; ++i) by_action[static_cast<std::size_t>(replay_.at(i).action.index)].push_back(i);

    for (int a = 0; a < actions; ++a) {
        const auto& rows = by_action[static_cast<std::size_t>(a)];
        Matrix features(static_cast<Eigen::Index>(rows.size()), config_.feature_dim);
        Vector y(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const StoredTransition& t = replay_.at(rows[r]);
            const auto ri = static_cast<Eigen::Index>(r);
            features.row(ri) = phi_all.col(s_col[rows[r]]).transpose();
            y(ri) = t.reward + (t.terminal ? 0.0 : config_.gamma * next_value(next_col[rows[r]]));
        }
        posteriors_[static_cast<std::size_t>(a)] = num::blr_update(
            num::BayesLinReg::prior(config_.feature_dim, config_.prior_var, config_.noise_var), features, y);
        factors_[static_cast<std::size_t>(a)] = num::blr_factor(posteriors_[static_cast<std::size_t>(a)]);
        mean_weights_.row(a) = posteriors_[static_cast<std::size_t>(a)].mean.transpose();
    }
}

void BdqnAgent::sync_target() {
    target_features_ = features_;
    target_weights_ = mean_weights_;
}

void BdqnAgent::observe(const envs::Transition& tr, double shaped_reward) {
    replay_.push(StoredTransition{tr.state, tr.action, shaped_reward, tr.next_state, tr.terminal});
    ++steps_;
    if (replay_.size() >= static_cast<std::size_t>(config_.learning_starts) && steps_ % config_.train_every == 0)
        train_step(replay_.sample(static_cast<std::size_t>(config_.batch_size), rng_));
    if (steps_ % config_.posterior_update_interval == 0) refresh_posteriors();
    if (steps_ % config_.target_sync_interval == 0) sync_target();
}

RunRecord run_training(const envs::Game& game, const TrainingSetup& setup) {
    const AgentConfig& cfg = setup.config;
    if (cfg.episode_cap < 1) throw std::invalid_argument("run_training: episode cap must be positive");

    RunRecord rec;
    rec.game = std::string(envs::game_name(game.id()));
    rec.mode = mode_name(setup.mode);
    rec.subject = setup.subject;
    rec.k = setup.k;
    rec.seed = setup.seed;
    rec.episode_cap = cfg.episode_cap;

    Rng env_rng = make_rng(setup.seed, "env");
    BdqnAgent agent(game, cfg, setup.seed);
    std::optional<feedback::FeedbackChannel> channel;
    if (const auto* full = std::get_if<FullAccess>(&setup.mode))
        channel.emplace(game, full->profile, make_rng(setup.seed, "channel"));

    int streak = 0;
    for (int episode = 0; episode < cfg.episode_cap; ++episode) {
        if (episode % cfg.thompson_interval == 0) agent.resample_weights();
        GameState s = game.reset(env_rng);
        int steps = 0;
        bool win = false;
        for (int t = 0; t < game.max_steps(); ++t) {
            if (t > 0 && cfg.thompson_step_interval > 0 && t % cfg.thompson_step_interval == 0)
                agent.resample_weights();
            const envs::Transition tr = game.step(s, agent.act(s));
            agent.observe(tr, shape_reward(setup.mode, tr, episode, channel ? &*channel : nullptr));
            ++steps;
            if (tr.terminal) {
                win = tr.reward > 0.0;
                break;
            }
            s = tr.next_state;
        }
        rec.wins.push_back(win ? 1 : 0);
        rec.episode_steps.push_back(steps);
        rec.env_steps += steps;
        streak = win ? streak + 1 : 0;
        if (streak >= kSuccessWindow) {
            rec.converged = true;
            rec.complete_episode = episode + 1;
            break;
        }
    }
    if (!rec.converged) rec.complete_episode = cfg.episode_cap;

    if (channel) rec.queries = channel->calls();
    else if (const auto* shaped = std::get_if<Shaped>(&setup.mode)) rec.queries = shaped->label_queries;
    else if (const auto* simple = std::get_if<SimpleShaped>(&setup.mode)) rec.queries = simple->label_queries;
    rec.success_curve = success_curve(rec.wins);
    return rec;
}

}  // namespace ihf::agent
