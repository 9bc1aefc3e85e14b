#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include <fftw3.h>

#include "fft.hpp"
#include "ihf/decoder.hpp"

namespace ihf::decoder {

namespace detail {

namespace {
// FFTW planning is not thread-safe; execution on distinct plans is.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

std::vector<std::complex<double>> rfft(const double* x, int n) {
    std::vector<double> in(x, x + n);
    std::vector<std::complex<double>> out(static_cast<std::size_t>(n / 2 + 1));
    fftw_plan plan;
    {
        std::lock_guard lock(plan_mutex());
        plan = fftw_plan_dft_r2c_1d(n, in.data(), reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    std::lock_guard lock(plan_mutex());
    fftw_destroy_plan(plan);
    return out;
}

std::vector<double> irfft(const std::vector<std::complex<double>>& spectrum, int n) {
    if (spectrum.size() != static_cast<std::size_t>(n / 2 + 1)) throw std::invalid_argument("irfft: bin count");
    std::vector<std::complex<double>> in = spectrum;  // c2r overwrites its input
    std::vector<double> out(static_cast<std::size_t>(n));
    fftw_plan plan;
    {
        std::lock_guard lock(plan_mutex());
        plan = fftw_plan_dft_c2r_1d(n, reinterpret_cast<fftw_complex*>(in.data()), out.data(), FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(plan_mutex());
        fftw_destroy_plan(plan);
    }
    for (double& v : out) v /= n;
    return out;
}

}  // namespace detail

double bandpass_gain(double f, double lo, double hi) {
    constexpr double kRamp = 1.0;
    f = std::abs(f);
    if (f < lo || f > hi) return 0.0;
    if (f < lo + kRamp) return 0.5 * (1.0 - std::cos(std::numbers::pi * (f - lo) / kRamp));
    if (f > hi - kRamp) return 0.5 * (1.0 - std::cos(std::numbers::pi * (hi - f) / kRamp));
    return 1.0;
}

Epoch bandpass(const Epoch& epoch, double lo, double hi) {
    if (!(lo > 0.0 && lo < hi && hi < epoch.fs / 2.0)) throw std::invalid_argument("bandpass: need 0 < lo < hi < fs/2");
    const int n = epoch.length();
    Epoch out = epoch;
    std::vector<double> row(static_cast<std::size_t>(n));
    for (int c = 0; c < epoch.channels(); ++c) {
        for (int i = 0; i < n; ++i) row[static_cast<std::size_t>(i)] = epoch.samples(c, i);
        auto spec = detail::rfft(row.data(), n);
        for (std::size_t k = 0; k < spec.size(); ++k)
            spec[k] *= bandpass_gain(static_cast<double>(k) * epoch.fs / n, lo, hi);
        const auto filtered = detail::irfft(spec, n);
        for (int i = 0; i < n; ++i) out.samples(c, i) = filtered[static_cast<std::size_t>(i)];
    }
    return out;
}

}  // namespace ihf::decoder
