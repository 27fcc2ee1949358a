#pragma once

// Thin RAII layer over FFTW plus a Bluestein chirp transform for sums
// X_m = sum_j a_j exp(-2 pi i beta (w0 + m dw)(x0 + j dx)) whose frequency
// lattice need not be the FFT lattice.

#include <fftw3.h>

#include <complex>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "core.hpp"

namespace locspec::fft {

// The FFTW planner is not re-entrant.
inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwDeleter {
  void operator()(void* p) const { fftw_free(p); }
};

// In-place complex DFT of fixed shape; plan created once, executed on any
// caller-provided array of that shape with fftw_execute_dft (thread-safe).
class Plan {
 public:
  Plan(std::vector<int> shape, int sign) : shape_(std::move(shape)) {
    size_ = 1;
    for (int s : shape_) size_ *= static_cast<std::size_t>(s);
    std::unique_ptr<fftw_complex, FftwDeleter> buf(fftw_alloc_complex(size_));
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan_ = fftw_plan_dft(static_cast<int>(shape_.size()), shape_.data(), buf.get(), buf.get(), sign,
                          FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!plan_) throw std::runtime_error("fftw: plan creation failed");
  }
  ~Plan() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;

  std::size_t size() const { return size_; }

  void execute(cplx* data) const {
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(plan_, p, p);
  }

 private:
  std::vector<int> shape_;
  std::size_t size_;
  fftw_plan plan_;
};

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

class ChirpDft {
 public:
  ChirpDft(int n_in, int n_out, double x0, double dx, double w0, double dw, double beta = 1.0)
      : n_in_(n_in), n_out_(n_out), len_(next_pow2(n_in + n_out - 1)),
        fwd_({static_cast<int>(len_)}, FFTW_FORWARD), bwd_({static_cast<int>(len_)}, FFTW_BACKWARD) {
    const double g = beta * dw * dx;
    pre_.resize(n_in);
    post_.resize(n_out);
    for (int j = 0; j < n_in; ++j)
      pre_[j] = std::polar(1.0, -2 * pi * beta * w0 * dx * j - pi * g * double(j) * j);
    for (int m = 0; m < n_out; ++m)
      post_[m] = std::polar(1.0, -2 * pi * beta * (w0 * x0 + dw * x0 * m) - pi * g * double(m) * m) / double(len_);
    kernel_.assign(len_, 0.0);
    for (int s = 0; s < n_out; ++s) kernel_[s] = std::polar(1.0, pi * g * double(s) * s);
    for (int s = 1; s < n_in; ++s) kernel_[len_ - s] = std::polar(1.0, pi * g * double(s) * s);
    fwd_.execute(kernel_.data());
  }

  std::size_t workspace_size() const { return len_; }

  // in[j * in_stride] -> out[m * out_stride]; work must hold workspace_size().
  void apply(const cplx* in, std::ptrdiff_t in_stride, cplx* out, std::ptrdiff_t out_stride,
             cplx* work) const {
    for (int j = 0; j < n_in_; ++j) work[j] = in[j * in_stride] * pre_[j];
    std::fill(work + n_in_, work + len_, cplx(0.0));
    fwd_.execute(work);
    for (std::size_t i = 0; i < len_; ++i) work[i] *= kernel_[i];
    bwd_.execute(work);
    for (int m = 0; m < n_out_; ++m) out[m * out_stride] = work[m] * post_[m];
  }

 private:
  int n_in_, n_out_;
  std::size_t len_;
  Plan fwd_, bwd_;
  std::vector<cplx> pre_, post_, kernel_;
};

}  // namespace locspec::fft
