#pragma once

#include <complex>
#include <vector>

namespace ihf::decoder::detail {

/// Real-input DFT of length n; returns the n/2 + 1 non-negative bins.
std::vector<std::complex<double>> rfft(const double* x, int n);
/// Inverse of rfft including the 1/n factor.
std::vector<double> irfft(const std::vector<std::complex<double>>& spectrum, int n);

}  // namespace ihf::decoder::detail
