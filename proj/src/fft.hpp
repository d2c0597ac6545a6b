#pragma once

#include "floq/lattice.hpp"

#include <fftw3.h>

#include <memory>

namespace floq::detail {

/// FFTW-backed workspace of `batch` contiguous length-`n` complex columns with
/// in-place forward and backward plans. Plans are created under a global lock;
/// executing them is safe from any thread that owns the workspace.
class FftWorkspace {
 public:
  FftWorkspace(Index n, Index batch);
  ~FftWorkspace();
  FftWorkspace(const FftWorkspace&) = delete;
  FftWorkspace& operator=(const FftWorkspace&) = delete;

  Index length() const { return n_; }
  Index batch() const { return batch_; }

  Eigen::Map<CMatrix> data() { return {reinterpret_cast<Complex*>(buffer_), n_, batch_}; }

  // Unnormalized transforms: forward uses exp(-i k x), backward exp(+i k x).
  void forward() { fftw_execute(forward_); }
  void backward() { fftw_execute(backward_); }

 private:
  Index n_;
  Index batch_;
  fftw_complex* buffer_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

}  // namespace floq::detail
