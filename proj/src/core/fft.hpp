#pragma once

#include <complex>
#include <vector>

namespace mdgait::fft {

// Unnormalized forward DFT, X(k) = sum_n x(n) exp(-j 2 pi n k / N).
// Output length equals input length.
std::vector<std::complex<double>> forward(const std::vector<std::complex<double>>& x);

// Unnormalized inverse DFT (no 1/N factor applied by FFTW; this wrapper
// divides by N so that inverse(forward(x)) == x).
std::vector<std::complex<double>> inverse(const std::vector<std::complex<double>>& x);

// Forward DFT of a real sequence, returning the first N/2+1 bins.
std::vector<std::complex<double>> forward_real(const std::vector<double>& x);

// Forward DFT of x zero-padded (or truncated) to length n.
std::vector<std::complex<double>> forward_padded(const std::vector<std::complex<double>>& x,
                                                 std::size_t n);
std::vector<std::complex<double>> forward_real_padded(const std::vector<double>& x,
                                                      std::size_t n);

}  // namespace mdgait::fft
