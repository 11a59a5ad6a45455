#pragma once

#include "bp/frft.hpp"
#include "bp/sigsim.hpp"
#include "bp/types.hpp"

#include <array>
#include <string_view>

namespace bp {

/// Ordinal order is load-bearing: it fixes the BER vector layout.
enum class MitigationKind : int {
    Unmitigated = 0,
    FilterBank = 1,
    Transversal = 2,
    Notch = 3,
    Frft = 4,
};

inline constexpr int kNumMitigations = 5;
inline constexpr std::array<MitigationKind, kNumMitigations> kAllMitigations = {
    MitigationKind::Unmitigated, MitigationKind::FilterBank,
    MitigationKind::Transversal, MitigationKind::Notch, MitigationKind::Frft};

std::string_view to_string(MitigationKind kind);

// ---------------------------------------------------------------------------
// Notch filter
// ---------------------------------------------------------------------------

/// Second-order IIR notch. Poles at r e^{+-j theta}; zeros on the unit
/// circle at +-theta so the null is exact. Passband gain (2-k2)/2.
struct NotchDesign {
    double pole_radius_r = 0.95;
    double notch_freq_theta = 0.0;
    double k1 = 0.0;
    double k2 = 0.0;
};

/// k1 = sqrt(1 + r^2 - 2 r cos(theta)), k2 = 1 - r^2.
std::pair<double, double> notch_coeffs(double r, double theta);

NotchDesign make_notch(double r, double theta);

/// |H(e^{j omega})| of the assembled notch.
double notch_response(const NotchDesign& d, double omega);

/// Run the notch over a signal (direct form, zero initial state).
cvec notch_filter(const NotchDesign& d, const cvec& x);

/// Digital frequency (rad/sample, in [0, 2 pi)) of the strongest
/// spectral line; FFT argmax over the whole block.
double estimate_notch_freq(const ComplexSignal& sig);

/// Notch at the estimated dominant frequency.
ComplexSignal notch_mitigate(const ComplexSignal& sig, double r = 0.95);

// ---------------------------------------------------------------------------
// Filter bank excision
// ---------------------------------------------------------------------------

struct FilterBankParams {
    int num_subbands = 64;     // power of two, >= 8
    int overlap_factor = 2;    // hop = num_subbands / overlap_factor
    double excision_threshold_db = 6.0; // above the median subband power
};

/// Windowed overlap-add analysis/synthesis; subbands whose mean power
/// exceeds median + threshold are zeroed. Perfect reconstruction when
/// nothing is excised.
ComplexSignal filterbank_mitigate(const ComplexSignal& sig,
                                  const FilterBankParams& params = {});

// ---------------------------------------------------------------------------
// Transversal (adaptive prediction-error) filter
// ---------------------------------------------------------------------------

struct TransversalParams {
    int num_taps = 16;
    double step_size_mu = 0.01; // normalized LMS step
};

/// One-step-ahead prediction-error filter; output is the prediction
/// error, which keeps the unpredictable (wideband) chips and cancels
/// predictable narrowband interference. DSSS SoI only.
ComplexSignal transversal_mitigate(const ComplexSignal& sig, const SoiConfig& cfg,
                                   const TransversalParams& params = {});

// ---------------------------------------------------------------------------
// FRFT excision
// ---------------------------------------------------------------------------

struct FrftSearchParams {
    int block_size = 1024;
    double grid_step = 0.01;        // resolution of the rotation search
    double coarse_step = 0.08;      // first search stage
    double mid_step = 0.02;         // second stage, +-0.06 around best
    double peak_threshold = 16.0;   // peak-to-mean of |F_a x|^2
    int null_halfwidth = 12;        // bins zeroed around a detected peak
    int max_probe_blocks = 6;       // blocks searched over the full grid
};

/// F_a applied blockwise (tail zero-padded). Exposed as the `frft`
/// operation; the plan must match block handling done by the caller.
cvec frft(const cvec& x, double order_a, const FrftPlan& plan);

/// Search rotations for a concentrated interference peak, null a small
/// neighborhood, rotate back. Blocks where no rotation reaches the
/// peak threshold pass through untouched.
ComplexSignal frft_mitigate(const ComplexSignal& sig,
                            const FrftSearchParams& params = {});

// ---------------------------------------------------------------------------
// Dispatcher
// ---------------------------------------------------------------------------

/// Apply one mitigation with default parameters. Unmitigated returns
/// the input unchanged; Transversal throws not_applicable_error for a
/// narrowband SoI.
ComplexSignal mitigate(const ComplexSignal& sig, MitigationKind kind,
                       const SoiConfig& cfg);

} // namespace bp
