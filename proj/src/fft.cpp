#include "fft.hpp"

#include <mutex>
#include <new>

namespace floq::detail {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

FftWorkspace::FftWorkspace(Index n, Index batch) : n_(n), batch_(batch) {
  buffer_ = fftw_alloc_complex(static_cast<std::size_t>(n * batch));
  if (buffer_ == nullptr) throw std::bad_alloc();
  int len = static_cast<int>(n);
  std::lock_guard lock(planner_mutex());
  // ESTIMATE keeps plan selection (and so every result bit) independent of timing.
  forward_ = fftw_plan_many_dft(1, &len, static_cast<int>(batch), buffer_, nullptr, 1, len,
                                buffer_, nullptr, 1, len, FFTW_FORWARD, FFTW_ESTIMATE);
  backward_ = fftw_plan_many_dft(1, &len, static_cast<int>(batch), buffer_, nullptr, 1, len,
                                 buffer_, nullptr, 1, len, FFTW_BACKWARD, FFTW_ESTIMATE);
}

FftWorkspace::~FftWorkspace() {
  std::lock_guard lock(planner_mutex());
  if (forward_ != nullptr) fftw_destroy_plan(forward_);
  if (backward_ != nullptr) fftw_destroy_plan(backward_);
  fftw_free(buffer_);
}

}  // namespace floq::detail
