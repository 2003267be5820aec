// FFTW-backed 2-D DFT. Plans are created once per (size, direction) and
// shared; execution uses the new-array interface, which is thread-safe.

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>
#include <vector>

#include "wavecoder/field.hpp"

namespace wavecoder {

namespace {

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(std::size_t n, int sign) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_pair(n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<Complex> scratch(n * n);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    const int dim = static_cast<int>(n);
    fftw_plan plan =
        fftw_plan_dft_2d(dim, dim, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan == nullptr) throw std::runtime_error("fft: plan creation failed");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

void run(ComplexTensor& values, int sign) {
  if (values.shape.size() != 2 || values.shape[0] != values.shape[1]) {
    throw std::invalid_argument("dft2: expects a square 2-D tensor, got " +
                                shape_string(values.shape));
  }
  auto* buf = reinterpret_cast<fftw_complex*>(values.data.data());
  fftw_execute_dft(cache().get(values.shape[0], sign), buf, buf);
}

}  // namespace

void dft2_inplace(ComplexTensor& values) { run(values, FFTW_FORWARD); }

void idft2_inplace(ComplexTensor& values) {
  run(values, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(values.size());
  for (auto& v : values.data) v *= scale;
}

}  // namespace wavecoder
