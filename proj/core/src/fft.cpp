#include "wendy/fft.hpp"

#include <map>
#include <mutex>
#include <vector>

#include <fftw3.h>

namespace wendy {

namespace {

// Plan creation is not thread-safe in FFTW; execution with new arrays is.
std::mutex plan_mutex;
std::map<int, fftw_plan>& plan_cache() {
  static std::map<int, fftw_plan> cache;
  return cache;
}

fftw_plan plan_for(int n) {
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto& cache = plan_cache();
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<std::complex<double>> scratch_in(n), scratch_out(n);
  fftw_plan plan = fftw_plan_dft_1d(
      n, reinterpret_cast<fftw_complex*>(scratch_in.data()),
      reinterpret_cast<fftw_complex*>(scratch_out.data()), FFTW_FORWARD,
      FFTW_ESTIMATE | FFTW_UNALIGNED);
  cache.emplace(n, plan);
  return plan;
}

}  // namespace

Eigen::VectorXcd fft_forward(const Eigen::VectorXcd& x) {
  const int n = static_cast<int>(x.size());
  if (n == 0) return {};
  Eigen::VectorXcd in = x;
  Eigen::VectorXcd out(n);
  fftw_execute_dft(plan_for(n),
                   reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

}  // namespace wendy
