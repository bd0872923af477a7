#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "core/common.hpp"
#include "core/fft.hpp"

using namespace mdgait;
using cvec = std::vector<std::complex<double>>;

namespace {

// Brute-force reference DFT, O(N^2).
cvec dft(const cvec& x) {
  const std::size_t n = x.size();
  cvec out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t m = 0; m < n; ++m) {
      const double ang = -2.0 * M_PI * static_cast<double>(m * k) / static_cast<double>(n);
      acc += x[m] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  return out;
}

double max_err(const cvec& a, const cvec& b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("forward matches a brute-force DFT on random data") {
  Rng rng(11);
  for (std::size_t n : {1u, 2u, 3u, 16u, 100u, 255u}) {
    cvec x(n);
    for (auto& v : x) v = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    CHECK(max_err(fft::forward(x), dft(x)) < 1e-9 * std::max<double>(1.0, n));
  }
}

TEST_CASE("inverse undoes forward") {
  Rng rng(12);
  cvec x(300);
  for (auto& v : x) v = {rng.normal(), rng.normal()};
  CHECK(max_err(fft::inverse(fft::forward(x)), x) < 1e-10);
}

TEST_CASE("Parseval: sum |x|^2 == sum |X|^2 / N") {
  Rng rng(13);
  cvec x(512);
  double time_energy = 0.0;
  for (auto& v : x) {
    v = {rng.normal(), rng.normal()};
    time_energy += std::norm(v);
  }
  double freq_energy = 0.0;
  for (const auto& v : fft::forward(x)) freq_energy += std::norm(v);
  CHECK(freq_energy / static_cast<double>(x.size()) ==
        doctest::Approx(time_energy).epsilon(1e-12));
}

TEST_CASE("pure tone concentrates in the right bin") {
  const std::size_t n = 256;
  const std::size_t k0 = 37;
  cvec x(n);
  for (std::size_t m = 0; m < n; ++m) {
    const double ang = 2.0 * M_PI * static_cast<double>(k0 * m) / static_cast<double>(n);
    x[m] = {std::cos(ang), std::sin(ang)};
  }
  const auto X = fft::forward(x);
  std::size_t best = 0;
  for (std::size_t k = 1; k < n; ++k)
    if (std::abs(X[k]) > std::abs(X[best])) best = k;
  CHECK(best == k0);
  CHECK(std::abs(X[k0]) == doctest::Approx(static_cast<double>(n)).epsilon(1e-9));
}

TEST_CASE("real transform equals complex transform's lower half") {
  Rng rng(14);
  std::vector<double> xr(200);
  cvec xc(200);
  for (std::size_t i = 0; i < xr.size(); ++i) {
    xr[i] = rng.normal();
    xc[i] = {xr[i], 0.0};
  }
  const auto R = fft::forward_real(xr);
  const auto C = fft::forward(xc);
  REQUIRE(R.size() == xr.size() / 2 + 1);
  for (std::size_t k = 0; k < R.size(); ++k) CHECK(std::abs(R[k] - C[k]) < 1e-10);
}

TEST_CASE("padded transforms zero-extend or truncate") {
  Rng rng(15);
  cvec x(60);
  for (auto& v : x) v = {rng.normal(), rng.normal()};

  cvec padded = x;
  padded.resize(128, {0.0, 0.0});
  CHECK(max_err(fft::forward_padded(x, 128), fft::forward(padded)) < 1e-10);

  cvec cut(x.begin(), x.begin() + 32);
  CHECK(max_err(fft::forward_padded(x, 32), fft::forward(cut)) < 1e-10);

  std::vector<double> xr(60);
  for (auto& v : xr) v = rng.normal();
  const auto R = fft::forward_real_padded(xr, 128);
  cvec xc(xr.size());
  for (std::size_t i = 0; i < xr.size(); ++i) xc[i] = {xr[i], 0.0};
  const auto C = fft::forward_padded(xc, 128);
  REQUIRE(R.size() == 128 / 2 + 1);
  for (std::size_t k = 0; k < R.size(); ++k) CHECK(std::abs(R[k] - C[k]) < 1e-10);
}
