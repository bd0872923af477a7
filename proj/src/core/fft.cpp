#include "core/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>
#include <stdexcept>

namespace mdgait::fft {

namespace {

// FFTW planning mutates global state; execution via the new-array interface is
// safe as long as each call owns its buffers. Plans are created once per
// (kind, size) with FFTW_ESTIMATE, which keeps results independent of runtime
// measurement noise.
std::mutex g_plan_mutex;

fftw_plan c2c_plan(std::size_t n) {
  static std::map<std::size_t, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  fftw_complex* buf = fftw_alloc_complex(n);
  fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_FORWARD,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(buf);
  if (!p) throw std::runtime_error("fftw planning failed");
  cache.emplace(n, p);
  return p;
}

fftw_plan c2c_inverse_plan(std::size_t n) {
  static std::map<std::size_t, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  fftw_complex* buf = fftw_alloc_complex(n);
  fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_BACKWARD,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(buf);
  if (!p) throw std::runtime_error("fftw planning failed");
  cache.emplace(n, p);
  return p;
}

fftw_plan r2c_plan(std::size_t n) {
  static std::map<std::size_t, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  double* in = fftw_alloc_real(n);
  fftw_complex* out = fftw_alloc_complex(n / 2 + 1);
  fftw_plan p = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out,
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(in);
  fftw_free(out);
  if (!p) throw std::runtime_error("fftw planning failed");
  cache.emplace(n, p);
  return p;
}

}  // namespace

std::vector<std::complex<double>> forward(const std::vector<std::complex<double>>& x) {
  return forward_padded(x, x.size());
}

std::vector<std::complex<double>> forward_padded(const std::vector<std::complex<double>>& x,
                                                 std::size_t n) {
  if (n == 0) throw std::invalid_argument("fft length must be positive");
  fftw_plan plan = c2c_plan(n);
  std::vector<std::complex<double>> buf(n, {0.0, 0.0});
  std::memcpy(buf.data(), x.data(), std::min(n, x.size()) * sizeof(std::complex<double>));
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(buf.data()),
                   reinterpret_cast<fftw_complex*>(buf.data()));
  return buf;
}

std::vector<std::complex<double>> inverse(const std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  if (n == 0) throw std::invalid_argument("fft length must be positive");
  fftw_plan plan = c2c_inverse_plan(n);
  std::vector<std::complex<double>> buf(x);
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(buf.data()),
                   reinterpret_cast<fftw_complex*>(buf.data()));
  const double inv_n = 1.0 / static_cast<double>(n);
  for (auto& v : buf) v *= inv_n;
  return buf;
}

std::vector<std::complex<double>> forward_real(const std::vector<double>& x) {
  return forward_real_padded(x, x.size());
}

std::vector<std::complex<double>> forward_real_padded(const std::vector<double>& x,
                                                      std::size_t n) {
  if (n == 0) throw std::invalid_argument("fft length must be positive");
  fftw_plan plan = r2c_plan(n);
  std::vector<double> in(n, 0.0);
  std::memcpy(in.data(), x.data(), std::min(n, x.size()) * sizeof(double));
  std::vector<std::complex<double>> out(n / 2 + 1);
  fftw_execute_dft_r2c(plan, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

}  // namespace mdgait::fft
