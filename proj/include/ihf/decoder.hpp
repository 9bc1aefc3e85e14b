#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <vector>

#include "ihf/numerics/checkpoint.hpp"
#include "ihf/numerics/linalg.hpp"
#include "ihf/rng.hpp"

namespace ihf::decoder {

/// One stimulus-locked window: channels x round(fs) samples covering
/// [-200, +800) ms, sample 0 at -200 ms.
struct Epoch {
    num::Matrix samples;
    double fs = 256.0;
    bool errp = false;

    int channels() const { return static_cast<int>(samples.rows()); }
    int length() const { return static_cast<int>(samples.cols()); }
};

inline constexpr double kPreStimulusSeconds = 0.2;
inline constexpr double kEpochSeconds = 1.0;

int epoch_length(double fs);
int stimulus_index(double fs);

/// Simulated EEG. The ERP spatial pattern is drawn from `source_seed`, so two
/// domains that share it share the generator of the signal; everything else
/// (noise, drift, trial order) comes from `seed`.
struct SyntheticEegConfig {
    int n_channels = 8;
    double fs = 256.0;
    double erp_amplitude = 5.0;  // uV at the strongest channel
    double erp_latency = 250.0;  // ms after the stimulus, negative lobe
    double noise_sigma = 10.0;   // uV RMS per channel
    double spectrum_tilt = 0.6;  // background power ~ 1/f^tilt
    double drift_amplitude = 2.0;  // uV, slow baseline wander
    std::uint64_t seed = 0;
    std::uint64_t source_seed = 7;

    void validate() const;
};

/// Balanced classes, alternating ErrP / non-ErrP, baseline corrected.
std::vector<Epoch> synth_epochs(const SyntheticEegConfig& config, int n_per_class);

/// Zero-phase FFT mask per channel: 1 inside [lo+1, hi-1] Hz, raised-cosine
/// ramps of 1 Hz inside each band edge, 0 outside [lo, hi].
Epoch bandpass(const Epoch& epoch, double lo, double hi);
/// Mask value at frequency f (Hz).
double bandpass_gain(double f, double lo, double hi);

struct SpatialFilterBank {
    num::Matrix filters;                // (2 * nfilter) x channels; class 0 rows first, unit-norm rows
    std::vector<num::Matrix> prototypes;  // per class: nfilter x samples, filtered class-average responses
    int nfilter = 0;

    int stacked_dim() const { return static_cast<int>(filters.rows()) * 2; }
};

/// Per class, the top generalized eigenvectors of (evoked covariance, total
/// signal covariance). `rho` shrinks the signal covariance; rho = 0 makes a
/// singular signal covariance an error.
SpatialFilterBank fit_xdawn(const std::vector<Epoch>& train, int nfilter, double rho = 0.1);

/// Covariance of [prototype_0; prototype_1; filters * X], shrunk by rho.
num::Matrix super_trial_cov(const Epoch& epoch, const SpatialFilterBank& bank, double rho = 0.1);
num::Matrix super_trial_cov_raw(const Epoch& epoch, const SpatialFilterBank& bank);

/// exp of the mean matrix-log.
num::Matrix log_euclid_mean(const std::vector<num::Matrix>& covs);

/// Backward elimination down to nelec dimensions. Each step drops the
/// dimension whose removal keeps the largest affine-invariant distance
/// between the log-Euclidean class means (lowest index on ties). Returns the
/// kept indices in ascending order.
std::vector<int> select_channels(const std::vector<num::Matrix>& class0, const std::vector<num::Matrix>& class1,
                                 int nelec);

num::Matrix restrict(const num::Matrix& cov, const std::vector<int>& keep);

/// Upper triangle (row-major) of log(cov) - log(reference), off-diagonals x sqrt(2).
num::Vector tangent_project(const num::Matrix& cov, const num::Matrix& reference);

/// x / ||x||_1; the zero vector maps to itself.
num::Vector l1_normalize(const num::Vector& x);

struct ElasticNetParams {
    double lambda = 0.01;
    double l1_ratio = 0.5;
    double tol = 1e-6;
    int max_sweeps = 10000;
};

struct LinearFit {
    num::Vector weights;
    double intercept = 0.0;
    int sweeps = 0;
};

/// Minimises 1/(2n) ||y - Xw - b||^2 + lambda*l1_ratio*||w||_1
/// + lambda*(1-l1_ratio)/2*||w||^2 by cyclic coordinate descent with an
/// unpenalised intercept. Rows of x are samples.
LinearFit elastic_net(const num::Matrix& x, const num::Vector& y, const ElasticNetParams& params);

/// Threshold among the scores maximising accuracy of (score >= t) against
/// labels; the lowest such score wins ties.
double best_threshold(const std::vector<double>& scores, const std::vector<bool>& labels);

struct DecoderParams {
    int nfilter = 3;
    int nelec = 0;  // 0: keep every stacked dimension
    ElasticNetParams net{};
    double rho = 0.1;
    double band_lo = 0.5;
    double band_hi = 40.0;
};

struct DecoderModel {
    DecoderParams params;
    int n_channels = 0;
    int n_samples = 0;
    double fs = 0.0;
    SpatialFilterBank bank;
    std::vector<int> selected;
    num::Matrix reference;
    num::Vector weights;
    double intercept = 0.0;
    double threshold = 0.0;
};

DecoderModel train_decoder(const std::vector<Epoch>& train, const DecoderParams& params);

struct Decision {
    double score = 0.0;
    bool errp = false;
};

/// errp = score >= threshold. Throws on a geometry mismatch.
Decision decode(const DecoderModel& model, const Epoch& epoch);
num::Vector features(const DecoderModel& model, const Epoch& epoch);

/// Mann-Whitney AUC, ties count one half. 0.5 if a class is missing.
double auc(const std::vector<double>& scores, const std::vector<bool>& labels);

struct EvalReport {
    double auc = 0.0;
    double sens = 0.0;
    double spec = 0.0;
    double accuracy = 0.0;
    int n = 0;
};
EvalReport evaluate(const DecoderModel& model, const std::vector<Epoch>& test);

struct CvReport {
    std::vector<double> fold_auc;
    double mean = 0.0;
    double std = 0.0;
    double train_auc_mean = 0.0;  // in-sample AUC of each fold model, averaged
};

/// Stratified k-fold: each class is shuffled with `seed` and dealt round robin.
CvReport cross_validate(const std::vector<Epoch>& epochs, const DecoderParams& params, int folds,
                        std::uint64_t seed);

struct TransferReport {
    double auc_in = 0.0;
    double auc_transfer = 0.0;
};

/// Trains on n_per_class epochs per class from `train_domain`, then scores a
/// fresh held-out set from each domain. Held-out sets use the domains' own
/// seeds offset by one, so identical domains give identical held-out sets.
TransferReport zero_shot_eval(const SyntheticEegConfig& train_domain, const SyntheticEegConfig& test_domain,
                              const DecoderParams& params, int n_per_class);

num::Checkpoint save_model(const DecoderModel& model);
DecoderModel load_model(const num::Checkpoint& ck);

/// Binary epoch file, little-endian:
///   "IHFEPOCH"  u32 version  u32 n_channels  f64 fs  u32 n_epochs  u32 n_samples
///   per epoch:  u8 label (1 = ErrP)  f64 samples[n_channels * n_samples] row-major
void write_epochs(std::ostream& os, const std::vector<Epoch>& epochs);
std::vector<Epoch> read_epochs(std::istream& is);
void save_epochs(const std::filesystem::path& path, const std::vector<Epoch>& epochs);
std::vector<Epoch> load_epochs(const std::filesystem::path& path);

}  // namespace ihf::decoder
