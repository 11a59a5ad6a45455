#include "bp/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <mutex>

namespace bp {
namespace {

// FFTW's planner is a global; make it safe to plan from worker threads.
void ensure_planner_safe() {
    static std::once_flag once;
    std::call_once(once, [] { fftw_make_planner_thread_safe(); });
}

} // namespace

FftPlan::FftPlan(int n, bool inverse) : n_(n), inverse_(inverse) {
    if (n < 1) throw dimension_error("FftPlan: length must be >= 1");
    ensure_planner_safe();
    buf_in_ = fftw_malloc(sizeof(fftw_complex) * static_cast<std::size_t>(n));
    buf_out_ = fftw_malloc(sizeof(fftw_complex) * static_cast<std::size_t>(n));
    plan_ = fftw_plan_dft_1d(n, static_cast<fftw_complex*>(buf_in_),
                             static_cast<fftw_complex*>(buf_out_),
                             inverse ? FFTW_BACKWARD : FFTW_FORWARD,
                             FFTW_ESTIMATE);
}

FftPlan::~FftPlan() {
    fftw_destroy_plan(static_cast<fftw_plan>(plan_));
    fftw_free(buf_in_);
    fftw_free(buf_out_);
}

void FftPlan::execute(const cplx* in, cplx* out) const {
    auto* bin = static_cast<fftw_complex*>(buf_in_);
    auto* bout = static_cast<fftw_complex*>(buf_out_);
    std::memcpy(bin, in, sizeof(cplx) * static_cast<std::size_t>(n_));
    fftw_execute(static_cast<fftw_plan>(plan_));
    if (inverse_) {
        const double s = 1.0 / n_;
        for (int i = 0; i < n_; ++i) {
            out[i] = cplx(bout[i][0] * s, bout[i][1] * s);
        }
    } else {
        std::memcpy(out, bout, sizeof(cplx) * static_cast<std::size_t>(n_));
    }
}

cvec fft(const cvec& x) {
    FftPlan plan(static_cast<int>(x.size()), false);
    cvec out(x.size());
    plan.execute(x.data(), out.data());
    return out;
}

cvec ifft(const cvec& x) {
    FftPlan plan(static_cast<int>(x.size()), true);
    cvec out(x.size());
    plan.execute(x.data(), out.data());
    return out;
}

} // namespace bp
