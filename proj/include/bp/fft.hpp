#pragma once

#include "bp/types.hpp"

namespace bp {

/// Forward DFT, X[k] = sum_n x[n] e^{-j2*pi*kn/N}. Any length >= 1.
cvec fft(const cvec& x);

/// Inverse DFT including the 1/N factor.
cvec ifft(const cvec& x);

/// Reusable plan for repeated transforms of one size (hot loops).
/// Not thread-safe per instance; create one per thread/call site.
class FftPlan {
public:
    FftPlan(int n, bool inverse);
    ~FftPlan();
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;

    int size() const { return n_; }

    /// out = DFT(in) (or scaled IDFT), both of length size().
    void execute(const cplx* in, cplx* out) const;

private:
    int n_;
    bool inverse_;
    void* plan_;
    void* buf_in_;
    void* buf_out_;
};

} // namespace bp
