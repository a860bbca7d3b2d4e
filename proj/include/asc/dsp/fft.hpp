// Copyright 2026 The bcnn-asc Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>

#include <fftw3.h>

#include "asc/util/error.hpp"

namespace asc {

// Real-to-complex FFT of a fixed power-of-two size, backed by FFTW.
//
// Plans are created once per size under a global lock (FFTW's planner is not
// thread-safe) with FFTW_ESTIMATE so the chosen algorithm, and therefore the
// output bits, do not depend on timing. Execution through the new-array
// interface is thread-safe, so one plan serves all threads.
class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n), plan_(plan_for(n)) {}

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  // Transforms `input` (length n) into `output` (length n/2+1).
  void forward(std::span<const double> input, std::span<std::complex<double>> output) const {
    if (input.size() != n_ || output.size() != bins())
      fail(ErrorKind::InvalidArgument, "fft buffer size mismatch");
    Buffer buf(n_);
    std::copy(input.begin(), input.end(), buf.in);
    fftw_execute_dft_r2c(plan_, buf.in, buf.out);
    for (std::size_t k = 0; k < bins(); ++k) output[k] = {buf.out[k][0], buf.out[k][1]};
  }

 private:
  struct Buffer {
    explicit Buffer(std::size_t n)
        : in(fftw_alloc_real(n)), out(fftw_alloc_complex(n / 2 + 1)) {}
    ~Buffer() {
      fftw_free(in);
      fftw_free(out);
    }
    Buffer(const Buffer&) = delete;
    Buffer& operator=(const Buffer&) = delete;
    double* in;
    fftw_complex* out;
  };

  static fftw_plan plan_for(std::size_t n) {
    if (n < 2 || (n & (n - 1)) != 0)
      fail(ErrorKind::InvalidArgument, "fft length must be a power of two >= 2");
    static std::mutex mutex;
    static std::map<std::size_t, fftw_plan> plans;
    std::lock_guard lock(mutex);
    auto it = plans.find(n);
    if (it != plans.end()) return it->second;
    Buffer scratch(n);
    fftw_plan p = fftw_plan_dft_r2c_1d(static_cast<int>(n), scratch.in, scratch.out, FFTW_ESTIMATE);
    if (p == nullptr) fail(ErrorKind::InvalidArgument, "fftw planning failed");
    plans.emplace(n, p);
    return p;
  }

  std::size_t n_;
  fftw_plan plan_;
};

}  // namespace asc
