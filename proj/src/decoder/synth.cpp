#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fft.hpp"
#include "ihf/decoder.hpp"

namespace ihf::decoder {

namespace {

constexpr double kLobeWidthMs = 40.0;
constexpr double kLobeSeparationMs = 150.0;
constexpr double kDriftHz = 0.3;

double gaussian(double t, double centre, double width) {
    const double z = (t - centre) / width;
    return std::exp(-0.5 * z * z);
}

// Unit-RMS noise with power falling as 1/f^tilt; no DC component.
std::vector<double> colored_noise(int n, double tilt, Rng& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<std::complex<double>> spec(static_cast<std::size_t>(n / 2 + 1));
    for (std::size_t k = 1; k < spec.size(); ++k) {
        const double scale = std::pow(static_cast<double>(k), -0.5 * tilt);
        spec[k] = {scale * gauss(rng), scale * gauss(rng)};
    }
    if (n % 2 == 0) spec.back() = {spec.back().real(), 0.0};
    auto x = detail::irfft(spec, n);
    double ss = 0.0;
    for (double v : x) ss += v * v;
    const double rms = std::sqrt(ss / n);
    for (double& v : x) v /= rms;
    return x;
}

}  // namespace

int epoch_length(double fs) { return static_cast<int>(std::lround(fs * kEpochSeconds)); }
int stimulus_index(double fs) { return static_cast<int>(std::lround(fs * kPreStimulusSeconds)); }

void SyntheticEegConfig::validate() const {
    if (n_channels < 1) throw std::invalid_argument("synth: need at least one channel");
    if (!(fs > 0.0)) throw std::invalid_argument("synth: fs must be positive");
    if (erp_amplitude < 0.0 || noise_sigma < 0.0 || drift_amplitude < 0.0)
        throw std::invalid_argument("synth: amplitudes must be non-negative");
    const double post_ms = (kEpochSeconds - kPreStimulusSeconds) * 1000.0;
    if (!(erp_latency >= 0.0 && erp_latency < post_ms))
        throw std::invalid_argument("synth: ERP latency outside the post-stimulus window");
}

std::vector<Epoch> synth_epochs(const SyntheticEegConfig& config, int n_per_class) {
    config.validate();
    if (n_per_class < 0) throw std::invalid_argument("synth: negative class size");
    const int n = epoch_length(config.fs);
    const int stim = stimulus_index(config.fs);

    Rng pattern_rng = make_rng(config.source_seed, "erp-pattern");
    std::normal_distribution<double> gauss(0.0, 1.0);
    num::Vector pattern(config.n_channels);
    for (int c = 0; c < config.n_channels; ++c) pattern(c) = gauss(pattern_rng);
    pattern /= pattern.cwiseAbs().maxCoeff();

    num::Vector erp(n);
    for (int i = 0; i < n; ++i) {
        const double t = (i - stim) * 1000.0 / config.fs;
        erp(i) = config.erp_amplitude * (gaussian(t, config.erp_latency + kLobeSeparationMs, kLobeWidthMs) -
                                         gaussian(t, config.erp_latency, kLobeWidthMs));
    }
    const num::Matrix evoked = pattern * erp.transpose();

    Rng rng = make_rng(config.seed, "eeg");
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<Epoch> out;
    out.reserve(static_cast<std::size_t>(2 * n_per_class));
    for (int k = 0; k < 2 * n_per_class; ++k) {
        Epoch e;
        e.fs = config.fs;
        e.errp = k % 2 == 0;
        e.samples.resize(config.n_channels, n);
        for (int c = 0; c < config.n_channels; ++c) {
            const auto noise = colored_noise(n, config.spectrum_tilt, rng);
            const double slope = unit(rng);
            const double phase = std::numbers::pi * unit(rng);
            for (int i = 0; i < n; ++i) {
                const double sec = i / config.fs;
                const double drift =
                    config.drift_amplitude * (slope * (2.0 * i / n - 1.0) + std::sin(2.0 * std::numbers::pi * kDriftHz * sec + phase));
                e.samples(c, i) = config.noise_sigma * noise[static_cast<std::size_t>(i)] + drift;
            }
        }
        if (e.errp) e.samples += evoked;
        if (stim > 0) e.samples.colwise() -= e.samples.leftCols(stim).rowwise().mean();
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace ihf::decoder
