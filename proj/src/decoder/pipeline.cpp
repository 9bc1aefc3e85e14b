#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ihf/decoder.hpp"

namespace ihf::decoder {

using num::Matrix;
using num::Vector;

LinearFit elastic_net(const Matrix& x, const Vector& y, const ElasticNetParams& params) {
    if (x.rows() != y.size() || x.rows() == 0) throw std::invalid_argument("elastic_net: shape mismatch");
    if (params.lambda < 0.0 || params.l1_ratio < 0.0 || params.l1_ratio > 1.0)
        throw std::invalid_argument("elastic_net: invalid penalty");
    const auto n = static_cast<double>(x.rows());
    const Vector x_mean = x.colwise().mean().transpose();
    const double y_mean = y.mean();
    const Matrix xc = x.rowwise() - x_mean.transpose();
    Vector residual = y.array() - y_mean;
    const Vector scale = xc.colwise().squaredNorm().transpose() / n;
    const double l1 = params.lambda * params.l1_ratio;
    const double l2 = params.lambda * (1.0 - params.l1_ratio);

    LinearFit fit;
    fit.weights = Vector::Zero(x.cols());
    for (fit.sweeps = 0; fit.sweeps < params.max_sweeps;) {
        ++fit.sweeps;
        double max_change = 0.0;
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            const double old = fit.weights(j);
            const double rho = xc.col(j).dot(residual) / n + scale(j) * old;
            const double shrunk = std::abs(rho) <= l1 ? 0.0 : (rho > 0.0 ? rho - l1 : rho + l1);
            const double denom = scale(j) + l2;
            const double updated = shrunk == 0.0 || denom == 0.0 ? 0.0 : shrunk / denom;
            if (updated != old) {
                residual -= (updated - old) * xc.col(j);
                fit.weights(j) = updated;
                max_change = std::max(max_change, std::abs(updated - old));
            }
        }
        if (max_change < params.tol) break;
    }
    fit.intercept = y_mean - x_mean.dot(fit.weights);
    return fit;
}

double best_threshold(const std::vector<double>& scores, const std::vector<bool>& labels) {
    if (scores.size() != labels.size() || scores.empty()) throw std::invalid_argument("best_threshold: bad input");
    std::vector<double> candidates = scores;
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    double best_t = candidates.front();
    long best_correct = -1;
    for (double t : candidates) {
        long correct = 0;
        for (std::size_t i = 0; i < scores.size(); ++i) correct += (scores[i] >= t) == labels[i] ? 1 : 0;
        if (correct > best_correct) {
            best_correct = correct;
            best_t = t;
        }
    }
    return best_t;
}

double auc(const std::vector<double>& scores, const std::vector<bool>& labels) {
    if (scores.size() != labels.size()) throw std::invalid_argument("auc: size mismatch");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double rank_sum = 0.0;
    long positives = 0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);  // average of ranks i+1..j
        for (std::size_t k = i; k < j; ++k)
            if (labels[order[k]]) {
                rank_sum += mid_rank;
                ++positives;
            }
        i = j;
    }
    const long negatives = static_cast<long>(scores.size()) - positives;
    if (positives == 0 || negatives == 0) return 0.5;
    const double p = static_cast<double>(positives);
    return (rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(negatives));
}

namespace {

void check_geometry(const DecoderModel& model, const Epoch& epoch) {
    if (epoch.channels() != model.n_channels || epoch.length() != model.n_samples || epoch.fs != model.fs)
        throw std::invalid_argument("decode: epoch geometry does not match the model");
}

Vector project(const DecoderModel& model, const Matrix& cov) {
    return l1_normalize(tangent_project(restrict(cov, model.selected), model.reference));
}

}  // namespace

DecoderModel train_decoder(const std::vector<Epoch>& train, const DecoderParams& params) {
    if (train.empty()) throw std::invalid_argument("train_decoder: empty training set");
    DecoderModel model;
    model.params = params;
    model.n_channels = train.front().channels();
    model.n_samples = train.front().length();
    model.fs = train.front().fs;

    std::vector<Epoch> filtered;
    filtered.reserve(train.size());
    for (const auto& e : train) {
        check_geometry(model, e);
        filtered.push_back(bandpass(e, params.band_lo, params.band_hi));
    }
    model.bank = fit_xdawn(filtered, params.nfilter, params.rho);

    std::vector<Matrix> covs, class0, class1;
    for (const auto& e : filtered) {
        covs.push_back(super_trial_cov(e, model.bank, params.rho));
        (e.errp ? class1 : class0).push_back(covs.back());
    }
    const int dim = model.bank.stacked_dim();
    const int nelec = params.nelec == 0 ? dim : params.nelec;
    if (nelec == dim) {
        model.selected.resize(static_cast<std::size_t>(dim));
        std::iota(model.selected.begin(), model.selected.end(), 0);
    } else {
        model.selected = select_channels(class0, class1, nelec);
    }

    std::vector<Matrix> kept;
    kept.reserve(covs.size());
    for (const auto& c : covs) kept.push_back(restrict(c, model.selected));
    model.reference = log_euclid_mean(kept);

    Matrix x(static_cast<Eigen::Index>(covs.size()), nelec * (nelec + 1) / 2);
    Vector y(static_cast<Eigen::Index>(covs.size()));
    for (std::size_t i = 0; i < covs.size(); ++i) {
        x.row(static_cast<Eigen::Index>(i)) = project(model, covs[i]).transpose();
        y(static_cast<Eigen::Index>(i)) = filtered[i].errp ? 1.0 : 0.0;
    }
    const LinearFit fit = elastic_net(x, y, params.net);
    model.weights = fit.weights;
    model.intercept = fit.intercept;

    std::vector<double> scores(covs.size());
    std::vector<bool> labels(covs.size());
    for (std::size_t i = 0; i < covs.size(); ++i) {
        scores[i] = x.row(static_cast<Eigen::Index>(i)).dot(model.weights) + model.intercept;
        labels[i] = filtered[i].errp;
    }
    model.threshold = best_threshold(scores, labels);
    return model;
}

Vector features(const DecoderModel& model, const Epoch& epoch) {
    check_geometry(model, epoch);
    const Epoch filtered = bandpass(epoch, model.params.band_lo, model.params.band_hi);
    return project(model, super_trial_cov(filtered, model.bank, model.params.rho));
}

Decision decode(const DecoderModel& model, const Epoch& epoch) {
    Decision d;
    d.score = features(model, epoch).dot(model.weights) + model.intercept;
    d.errp = d.score >= model.threshold;
    return d;
}

EvalReport evaluate(const DecoderModel& model, const std::vector<Epoch>& test) {
    EvalReport r;
    r.n = static_cast<int>(test.size());
    std::vector<double> scores;
    std::vector<bool> labels;
    long tp = 0, tn = 0, pos = 0, neg = 0;
    for (const auto& e : test) {
        const Decision d = decode(model, e);
        scores.push_back(d.score);
        labels.push_back(e.errp);
        if (e.errp) {
            ++pos;
            tp += d.errp ? 1 : 0;
        } else {
            ++neg;
            tn += d.errp ? 0 : 1;
        }
    }
    r.auc = auc(scores, labels);
    r.sens = pos > 0 ? static_cast<double>(tp) / pos : 0.0;
    r.spec = neg > 0 ? static_cast<double>(tn) / neg : 0.0;
    r.accuracy = r.n > 0 ? static_cast<double>(tp + tn) / r.n : 0.0;
    return r;
}

CvReport cross_validate(const std::vector<Epoch>& epochs, const DecoderParams& params, int folds, std::uint64_t seed) {
    if (folds < 2) throw std::invalid_argument("cross_validate: need at least two folds");
    std::vector<int> fold_of(epochs.size(), 0);
    Rng rng = make_rng(seed, "cv-folds");
    for (bool cls : {false, true}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < epochs.size(); ++i)
            if (epochs[i].errp == cls) idx.push_back(i);
        if (static_cast<int>(idx.size()) < folds) throw std::invalid_argument("cross_validate: class smaller than fold count");
        std::shuffle(idx.begin(), idx.end(), rng);
        for (std::size_t k = 0; k < idx.size(); ++k) fold_of[idx[k]] = static_cast<int>(k % static_cast<std::size_t>(folds));
    }

    CvReport report;
    for (int f = 0; f < folds; ++f) {
        std::vector<Epoch> train, test;
        for (std::size_t i = 0; i < epochs.size(); ++i) (fold_of[i] == f ? test : train).push_back(epochs[i]);
        const DecoderModel model = train_decoder(train, params);
        report.fold_auc.push_back(evaluate(model, test).auc);
        report.train_auc_mean += evaluate(model, train).auc / folds;
    }
    report.mean = std::accumulate(report.fold_auc.begin(), report.fold_auc.end(), 0.0) / folds;
    double ss = 0.0;
    for (double a : report.fold_auc) ss += (a - report.mean) * (a - report.mean);
    report.std = std::sqrt(ss / folds);
    return report;
}

TransferReport zero_shot_eval(const SyntheticEegConfig& train_domain, const SyntheticEegConfig& test_domain,
                              const DecoderParams& params, int n_per_class) {
    if (train_domain.n_channels != test_domain.n_channels || train_domain.fs != test_domain.fs)
        throw std::invalid_argument("zero_shot_eval: domains differ in channel count or sampling rate");
    const DecoderModel model = train_decoder(synth_epochs(train_domain, n_per_class), params);
    SyntheticEegConfig held_in = train_domain;
    SyntheticEegConfig held_out = test_domain;
    held_in.seed += 1;
    held_out.seed += 1;
    TransferReport r;
    r.auc_in = evaluate(model, synth_epochs(held_in, n_per_class)).auc;
    r.auc_transfer = evaluate(model, synth_epochs(held_out, n_per_class)).auc;
    return r;
}

namespace {

std::vector<double> pack(const Matrix& m) {
    std::vector<double> out{static_cast<double>(m.rows()), static_cast<double>(m.cols())};
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
    return out;
}

Matrix unpack(const std::vector<double>& v) {
    if (v.size() < 2) throw std::runtime_error("decoder checkpoint: truncated matrix");
    const auto rows = static_cast<Eigen::Index>(v[0]);
    const auto cols = static_cast<Eigen::Index>(v[1]);
    if (static_cast<std::size_t>(rows * cols) + 2 != v.size()) throw std::runtime_error("decoder checkpoint: bad matrix size");
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = v[static_cast<std::size_t>(2 + i * cols + j)];
    return m;
}

}  // namespace

num::Checkpoint save_model(const DecoderModel& m) {
    num::Checkpoint ck;
    ck.put("kind", std::string("decoder"));
    const auto& p = m.params;
    ck.put("params", std::vector<double>{static_cast<double>(p.nfilter), static_cast<double>(p.nelec), p.net.lambda,
                                         p.net.l1_ratio, p.net.tol, static_cast<double>(p.net.max_sweeps), p.rho,
                                         p.band_lo, p.band_hi});
    ck.put("geometry", std::vector<double>{static_cast<double>(m.n_channels), static_cast<double>(m.n_samples), m.fs});
    ck.put("filters", pack(m.bank.filters));
    ck.put("prototype0", pack(m.bank.prototypes.at(0)));
    ck.put("prototype1", pack(m.bank.prototypes.at(1)));
    ck.put("selected", std::vector<double>(m.selected.begin(), m.selected.end()));
    ck.put("reference", pack(m.reference));
    ck.put("weights", std::vector<double>(m.weights.data(), m.weights.data() + m.weights.size()));
    ck.put("intercept", std::vector<double>{m.intercept});
    ck.put("threshold", std::vector<double>{m.threshold});
    return ck;
}

DecoderModel load_model(const num::Checkpoint& ck) {
    if (!ck.contains("kind") || ck.text("kind") != "decoder") throw std::runtime_error("checkpoint is not a decoder model");
    DecoderModel m;
    const auto& p = ck.reals("params");
    if (p.size() != 9) throw std::runtime_error("decoder checkpoint: bad params");
    m.params.nfilter = static_cast<int>(p[0]);
    m.params.nelec = static_cast<int>(p[1]);
    m.params.net = {p[2], p[3], p[4], static_cast<int>(p[5])};
    m.params.rho = p[6];
    m.params.band_lo = p[7];
    m.params.band_hi = p[8];
    const auto& g = ck.reals("geometry");
    if (g.size() != 3) throw std::runtime_error("decoder checkpoint: bad geometry");
    m.n_channels = static_cast<int>(g[0]);
    m.n_samples = static_cast<int>(g[1]);
    m.fs = g[2];
    m.bank.nfilter = m.params.nfilter;
    m.bank.filters = unpack(ck.reals("filters"));
    m.bank.prototypes = {unpack(ck.reals("prototype0")), unpack(ck.reals("prototype1"))};
    for (double s : ck.reals("selected")) m.selected.push_back(static_cast<int>(s));
    m.reference = unpack(ck.reals("reference"));
    const auto& w = ck.reals("weights");
    m.weights = Eigen::Map<const Vector>(w.data(), static_cast<Eigen::Index>(w.size()));
    m.intercept = ck.real("intercept");
    m.threshold = ck.real("threshold");
    return m;
}

}  // namespace ihf::decoder
