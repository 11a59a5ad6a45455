#include "bp/mitigate.hpp"

#include "bp/fft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace bp {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
} // namespace

std::string_view to_string(MitigationKind kind) {
    switch (kind) {
    case MitigationKind::Unmitigated: return "unmitigated";
    case MitigationKind::FilterBank: return "filter_bank";
    case MitigationKind::Transversal: return "transversal";
    case MitigationKind::Notch: return "notch";
    case MitigationKind::Frft: return "frft";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Notch
// ---------------------------------------------------------------------------

std::pair<double, double> notch_coeffs(double r, double theta) {
    if (!(r > 0.0 && r < 1.0))
        throw config_error("notch_coeffs: pole radius must be in (0,1)");
    const double k1 = std::sqrt(1.0 + r * r - 2.0 * r * std::cos(theta));
    const double k2 = 1.0 - r * r;
    return {k1, k2};
}

NotchDesign make_notch(double r, double theta) {
    auto [k1, k2] = notch_coeffs(r, theta);
    return NotchDesign{r, theta, k1, k2};
}

namespace {

// Direct-form coefficients. The denominator comes straight from the
// k-parameters (2 - k2 - k1^2 = 2 r cos(theta), 1 - k2 = r^2). The
// numerator keeps its zeros on the unit circle so the null at theta is
// exact; the leading gain is (2 - k2) / 2.
struct NotchBiquad {
    double b0, b1, b2; // numerator (gain folded in)
    double a1, a2;     // denominator, y[n] = ... - a1 y[n-1] - a2 y[n-2]
};

NotchBiquad notch_biquad(const NotchDesign& d) {
    const double g = (2.0 - d.k2) / 2.0;
    const double c = std::cos(d.notch_freq_theta);
    NotchBiquad q;
    q.b0 = g;
    q.b1 = -2.0 * c * g;
    q.b2 = g;
    q.a1 = -(2.0 - d.k2 - d.k1 * d.k1);
    q.a2 = 1.0 - d.k2;
    return q;
}

} // namespace

double notch_response(const NotchDesign& d, double omega) {
    const NotchBiquad q = notch_biquad(d);
    const cplx z1 = std::polar(1.0, -omega);
    const cplx z2 = z1 * z1;
    const cplx num = q.b0 + q.b1 * z1 + q.b2 * z2;
    const cplx den = 1.0 + q.a1 * z1 + q.a2 * z2;
    return std::abs(num / den);
}

cvec notch_filter(const NotchDesign& d, const cvec& x) {
    const NotchBiquad q = notch_biquad(d);
    cvec y(x.size());
    cplx x1 = 0.0, x2 = 0.0, y1 = 0.0, y2 = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) {
        cplx out = q.b0 * x[n] + q.b1 * x1 + q.b2 * x2 - q.a1 * y1 - q.a2 * y2;
        x2 = x1;
        x1 = x[n];
        y2 = y1;
        y1 = out;
        y[n] = out;
    }
    return y;
}

double estimate_notch_freq(const ComplexSignal& sig) {
    const std::size_t n = sig.size();
    if (n < 256)
        throw dimension_error("estimate_notch_freq: need at least 256 samples");
    cvec spec = fft(sig.samples);
    std::size_t best = 0;
    double best_mag = -1.0;
    for (std::size_t k = 0; k < n; ++k) {
        double m = std::norm(spec[k]);
        if (m > best_mag) {
            best_mag = m;
            best = k;
        }
    }
    return kTwoPi * static_cast<double>(best) / static_cast<double>(n);
}

ComplexSignal notch_mitigate(const ComplexSignal& sig, double r) {
    const double theta = estimate_notch_freq(sig);
    const NotchDesign d = make_notch(r, theta);
    ComplexSignal out;
    out.sample_rate_hz = sig.sample_rate_hz;
    out.samples = notch_filter(d, sig.samples);
    return out;
}

// ---------------------------------------------------------------------------
// Filter bank
// ---------------------------------------------------------------------------

ComplexSignal filterbank_mitigate(const ComplexSignal& sig,
                                  const FilterBankParams& params) {
    const int m = params.num_subbands;
    if (m < 8 || (m & (m - 1)) != 0)
        throw config_error("filterbank: num_subbands must be a power of two >= 8");
    if (params.overlap_factor < 2 || m % params.overlap_factor != 0)
        throw config_error("filterbank: overlap_factor must divide num_subbands");
    const std::size_t len = sig.size();
    if (len < static_cast<std::size_t>(m) * params.overlap_factor)
        throw dimension_error("filterbank: signal too short for the bank");

    const int hop = m / params.overlap_factor;

    // sqrt-Hann analysis and synthesis windows; their product overlap-adds
    // to a constant, and the explicit window-power normalization keeps
    // reconstruction exact at the block edges too.
    std::vector<double> win(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i)
        win[i] = std::sqrt(0.5 - 0.5 * std::cos(kTwoPi * i / m));

    const std::size_t pad = static_cast<std::size_t>(m);
    const std::size_t padded = len + 2 * pad;
    const std::size_t num_frames = (padded - m) / hop + 1;

    FftPlan fwd(m, false), inv(m, true);
    cvec frame(static_cast<std::size_t>(m));
    std::vector<cvec> spectra(num_frames);
    std::vector<double> band_power(static_cast<std::size_t>(m), 0.0);

    auto sample_at = [&](std::size_t p) -> cplx {
        return (p >= pad && p - pad < len) ? sig.samples[p - pad] : cplx(0.0);
    };

    for (std::size_t f = 0; f < num_frames; ++f) {
        const std::size_t start = f * hop;
        for (int i = 0; i < m; ++i)
            frame[static_cast<std::size_t>(i)] = sample_at(start + i) * win[i];
        spectra[f].resize(static_cast<std::size_t>(m));
        fwd.execute(frame.data(), spectra[f].data());
        for (int k = 0; k < m; ++k)
            band_power[static_cast<std::size_t>(k)] += std::norm(spectra[f][k]);
    }
    for (double& p : band_power) p /= static_cast<double>(num_frames);

    std::vector<bool> excise(static_cast<std::size_t>(m), false);
    if (std::isfinite(params.excision_threshold_db)) {
        std::vector<double> sorted = band_power;
        std::sort(sorted.begin(), sorted.end());
        const double median =
            0.5 * (sorted[(m - 1) / 2] + sorted[m / 2]);
        const double cut =
            median * std::pow(10.0, params.excision_threshold_db / 10.0);
        for (int k = 0; k < m; ++k)
            excise[static_cast<std::size_t>(k)] = band_power[k] > cut;
    }

    std::vector<cplx> acc(padded, cplx(0.0));
    std::vector<double> wsum(padded, 0.0);
    cvec time(static_cast<std::size_t>(m));
    for (std::size_t f = 0; f < num_frames; ++f) {
        for (int k = 0; k < m; ++k)
            if (excise[static_cast<std::size_t>(k)]) spectra[f][k] = 0.0;
        inv.execute(spectra[f].data(), time.data());
        const std::size_t start = f * hop;
        for (int i = 0; i < m; ++i) {
            acc[start + i] += time[static_cast<std::size_t>(i)] * win[i];
            wsum[start + i] += win[i] * win[i];
        }
    }

    ComplexSignal out;
    out.sample_rate_hz = sig.sample_rate_hz;
    out.samples.resize(len);
    for (std::size_t i = 0; i < len; ++i) {
        const double w = wsum[pad + i];
        out.samples[i] = w > 1e-12 ? acc[pad + i] / w : cplx(0.0);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Transversal filter
// ---------------------------------------------------------------------------

ComplexSignal transversal_mitigate(const ComplexSignal& sig, const SoiConfig& cfg,
                                   const TransversalParams& params) {
    if (!cfg.is_dsss)
        throw not_applicable_error(
            "transversal filter is only applicable to a DSSS SoI");
    if (params.num_taps < 2)
        throw config_error("transversal: num_taps must be >= 2");
    if (!(params.step_size_mu > 0.0))
        throw config_error("transversal: step size must be positive");

    const int taps = params.num_taps;
    const double mu = params.step_size_mu;
    const double eps = 1e-12;

    cvec w(static_cast<std::size_t>(taps), cplx(0.0));
    cvec d(static_cast<std::size_t>(taps), cplx(0.0)); // d[0] newest
    double dpow = 0.0;

    ComplexSignal out;
    out.sample_rate_hz = sig.sample_rate_hz;
    out.samples.resize(sig.size());
    for (std::size_t n = 0; n < sig.size(); ++n) {
        cplx pred = 0.0;
        for (int i = 0; i < taps; ++i) pred += w[i] * d[i];
        const cplx e = sig.samples[n] - pred;
        out.samples[n] = e;

        const double g = mu / (dpow + eps);
        for (int i = 0; i < taps; ++i) w[i] += g * e * std::conj(d[i]);

        dpow += std::norm(sig.samples[n]) - std::norm(d[taps - 1]);
        for (int i = taps - 1; i > 0; --i) d[i] = d[i - 1];
        d[0] = sig.samples[n];
    }
    return out;
}

// ---------------------------------------------------------------------------
// FRFT excision
// ---------------------------------------------------------------------------

cvec frft(const cvec& x, double order_a, const FrftPlan& plan) {
    return plan.apply(x, order_a);
}

namespace {

// Peak-to-mean of |y|^2 for each [re|im] column pair of a transformed
// batch; also reports the peak row of the best candidate.
struct CandidateScore {
    double ptm = 0.0;
    int peak_row = 0;
};

CandidateScore score_column_pair(const Eigen::MatrixXd& y, int pair) {
    const int n = static_cast<int>(y.rows());
    double sum = 0.0, peak = -1.0;
    int peak_row = 0;
    for (int i = 0; i < n; ++i) {
        const double re = y(i, 2 * pair), im = y(i, 2 * pair + 1);
        const double p = re * re + im * im;
        sum += p;
        if (p > peak) {
            peak = p;
            peak_row = i;
        }
    }
    const double mean = sum / n;
    return {mean > 0.0 ? peak / mean : 0.0, peak_row};
}

struct SearchResult {
    double order = 0.0;
    double ptm = 0.0;
    int peak_row = 0;
};

// Evaluate the peak-to-mean metric for a batch of rotation orders of
// one block (coefficients precomputed). One GEMM for the whole batch.
SearchResult evaluate_orders(const FrftPlan& plan, const Eigen::MatrixXd& coeffs,
                             const std::vector<double>& orders) {
    const int n = plan.size();
    Eigen::MatrixXd batch(n, 2 * static_cast<int>(orders.size()));
    for (std::size_t c = 0; c < orders.size(); ++c) {
        batch.col(2 * c) = coeffs.col(0);
        batch.col(2 * c + 1) = coeffs.col(1);
        plan.rotate_coefficients(batch, orders[c], static_cast<int>(2 * c));
    }
    Eigen::MatrixXd y = plan.basis() * batch;
    SearchResult best;
    best.ptm = -1.0;
    for (std::size_t c = 0; c < orders.size(); ++c) {
        CandidateScore s = score_column_pair(y, static_cast<int>(c));
        if (s.ptm > best.ptm) {
            best = {orders[c], s.ptm, s.peak_row};
        }
    }
    return best;
}

std::vector<double> grid_around(double center, double step, double halfwidth,
                                double grid_step) {
    std::vector<double> out;
    for (double off = -halfwidth; off <= halfwidth + 1e-12; off += step) {
        double a = center + off;
        // snap to the search lattice and keep within [0, 2)
        a = std::round(a / grid_step) * grid_step;
        if (a < 0.0 || a >= 2.0) continue;
        if (!out.empty() && std::abs(out.back() - a) < grid_step / 2) continue;
        out.push_back(a);
    }
    return out;
}

// Hierarchical search over the 0.01 rotation lattice: coarse pass over
// [0,2), then two refinements around the running best.
SearchResult search_block(const FrftPlan& plan, const Eigen::MatrixXd& coeffs,
                          const FrftSearchParams& p) {
    std::vector<double> coarse;
    for (double a = 0.0; a < 2.0; a += p.coarse_step)
        coarse.push_back(std::round(a / p.grid_step) * p.grid_step);
    SearchResult best = evaluate_orders(plan, coeffs, coarse);

    auto mid = grid_around(best.order, p.mid_step, p.coarse_step - p.mid_step,
                           p.grid_step);
    SearchResult mid_res = evaluate_orders(plan, coeffs, mid);
    if (mid_res.ptm > best.ptm) best = mid_res;

    auto fine = grid_around(best.order, p.grid_step, p.mid_step - p.grid_step,
                            p.grid_step);
    SearchResult fine_res = evaluate_orders(plan, coeffs, fine);
    if (fine_res.ptm > best.ptm) best = fine_res;
    return best;
}

} // namespace

ComplexSignal frft_mitigate(const ComplexSignal& sig, const FrftSearchParams& p) {
    const std::size_t len = sig.size();
    if (len == 0) throw dimension_error("frft_mitigate: empty signal");
    const int nb_size = p.block_size;
    const std::size_t num_blocks = (len + nb_size - 1) / nb_size;
    auto plan = shared_frft_plan(nb_size);

    // Eigenbasis coefficients per block (tail zero-padded).
    std::vector<Eigen::MatrixXd> coeffs(num_blocks);
    cvec padded(static_cast<std::size_t>(nb_size));
    for (std::size_t b = 0; b < num_blocks; ++b) {
        const std::size_t start = b * nb_size;
        const std::size_t count = std::min<std::size_t>(nb_size, len - start);
        std::copy_n(sig.samples.begin() + static_cast<std::ptrdiff_t>(start), count,
                    padded.begin());
        std::fill(padded.begin() + static_cast<std::ptrdiff_t>(count), padded.end(),
                  cplx(0.0));
        coeffs[b] = plan->coefficients(padded.data(), padded.size());
    }

    // Full search on a spread of probe blocks; a contiguous on-interval
    // of at least 20% of the signal always overlaps one of them.
    const std::size_t probes =
        std::min<std::size_t>(num_blocks, static_cast<std::size_t>(p.max_probe_blocks));
    SearchResult global;
    global.ptm = -1.0;
    for (std::size_t i = 0; i < probes; ++i) {
        const std::size_t b =
            probes == 1 ? 0 : i * (num_blocks - 1) / (probes - 1);
        SearchResult r = search_block(*plan, coeffs[b], p);
        if (r.ptm > global.ptm) global = r;
    }

    ComplexSignal out;
    out.sample_rate_hz = sig.sample_rate_hz;
    if (global.ptm < p.peak_threshold) {
        out.samples = sig.samples; // nothing concentrated anywhere: pass through
        return out;
    }

    out.samples.resize(len);
    for (std::size_t b = 0; b < num_blocks; ++b) {
        const std::size_t start = b * nb_size;
        const std::size_t count = std::min<std::size_t>(nb_size, len - start);

        // Refine around the global rotation for this block.
        auto cands = grid_around(global.order, p.grid_step, 2.0 * p.grid_step,
                                 p.grid_step);
        SearchResult local = evaluate_orders(*plan, coeffs[b], cands);
        if (local.ptm < p.peak_threshold) {
            std::copy_n(sig.samples.begin() + static_cast<std::ptrdiff_t>(start),
                        count, out.samples.begin() + static_cast<std::ptrdiff_t>(start));
            continue;
        }

        // Transform, null the peak neighborhood, rotate back.
        Eigen::MatrixXd rot = coeffs[b];
        plan->rotate_coefficients(rot, local.order);
        Eigen::MatrixXd xa = plan->basis() * rot;
        const int lo = std::max(0, local.peak_row - p.null_halfwidth);
        const int hi = std::min(nb_size - 1, local.peak_row + p.null_halfwidth);
        for (int i = lo; i <= hi; ++i) {
            xa(i, 0) = 0.0;
            xa(i, 1) = 0.0;
        }
        Eigen::MatrixXd back = plan->basis().transpose() * xa;
        plan->rotate_coefficients(back, -local.order);
        Eigen::MatrixXd y = plan->basis() * back;
        for (std::size_t i = 0; i < count; ++i)
            out.samples[start + i] =
                cplx(y(static_cast<int>(i), 0), y(static_cast<int>(i), 1));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Dispatcher
// ---------------------------------------------------------------------------

ComplexSignal mitigate(const ComplexSignal& sig, MitigationKind kind,
                       const SoiConfig& cfg) {
    switch (kind) {
    case MitigationKind::Unmitigated:
        return sig;
    case MitigationKind::FilterBank:
        return filterbank_mitigate(sig);
    case MitigationKind::Transversal:
        return transversal_mitigate(sig, cfg);
    case MitigationKind::Notch:
        return notch_mitigate(sig);
    case MitigationKind::Frft:
        return frft_mitigate(sig);
    }
    throw config_error("mitigate: unknown kind");
}

} // namespace bp
