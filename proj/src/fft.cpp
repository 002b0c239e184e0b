#include "neurolock/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>

namespace neurolock::fft {

namespace {

// FFTW planning is not thread-safe; execution with the new-array interface
// is. Plans are made once per (size, direction) and reused.
struct PlanCache {
  std::mutex mutex;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans;

  fftw_plan get(std::size_t n, int sign) {
    std::lock_guard lock(mutex);
    auto it = plans.find({n, sign});
    if (it != plans.end()) return it->second;
    auto* in = fftw_alloc_complex(n);
    auto* out = fftw_alloc_complex(n);
    fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), in, out, sign, FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
    plans.emplace(std::make_pair(n, sign), p);
    return p;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans) fftw_destroy_plan(plan);
  }
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n) : ptr(fftw_alloc_complex(n)) {}
  ~FftwBuffer() { fftw_free(ptr); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* ptr;
};

std::vector<std::complex<double>> run(const std::complex<double>* data,
                                      std::size_t n, int sign) {
  FftwBuffer in(n), out(n);
  for (std::size_t i = 0; i < n; ++i) {
    in.ptr[i][0] = data[i].real();
    in.ptr[i][1] = data[i].imag();
  }
  fftw_execute_dft(cache().get(n, sign), in.ptr, out.ptr);
  std::vector<std::complex<double>> result(n);
  for (std::size_t i = 0; i < n; ++i) result[i] = {out.ptr[i][0], out.ptr[i][1]};
  return result;
}

}  // namespace

std::vector<std::complex<double>> forward(std::span<const double> x) {
  std::vector<std::complex<double>> c(x.begin(), x.end());
  if (c.empty()) return c;
  return run(c.data(), c.size(), FFTW_FORWARD);
}

std::vector<std::complex<double>> inverse(std::span<const std::complex<double>> spectrum) {
  if (spectrum.empty()) return {};
  auto r = run(spectrum.data(), spectrum.size(), FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(spectrum.size());
  for (auto& v : r) v *= scale;
  return r;
}

std::vector<double> convolve(std::span<const double> x, std::span<const double> h) {
  if (x.empty() || h.empty()) return {};
  const std::size_t out_len = x.size() + h.size() - 1;
  std::size_t n = 1;
  while (n < out_len) n <<= 1;
  std::vector<std::complex<double>> a(n), b(n);
  std::copy(x.begin(), x.end(), a.begin());
  std::copy(h.begin(), h.end(), b.begin());
  auto fa = run(a.data(), n, FFTW_FORWARD);
  const auto fb = run(b.data(), n, FFTW_FORWARD);
  for (std::size_t i = 0; i < n; ++i) fa[i] *= fb[i];
  const auto y = run(fa.data(), n, FFTW_BACKWARD);
  std::vector<double> result(out_len);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < out_len; ++i) result[i] = y[i].real() * scale;
  return result;
}

}  // namespace neurolock::fft
