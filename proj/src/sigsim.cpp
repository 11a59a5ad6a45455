#include "bp/sigsim.hpp"

#include "bp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace bp {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInvSqrt2 = std::numbers::sqrt2 / 2.0;
} // namespace

std::size_t SoiConfig::num_samples() const {
    std::size_t symbols =
        static_cast<std::size_t>(num_bits) / static_cast<std::size_t>(bits_per_symbol);
    return symbols * static_cast<std::size_t>(samples_per_symbol) *
           static_cast<std::size_t>(spreading_factor);
}

void SoiConfig::validate() const {
    if (bits_per_symbol != 1 && bits_per_symbol != 2)
        throw config_error("SoiConfig: bits_per_symbol must be 1 or 2");
    if (samples_per_symbol < 1)
        throw config_error("SoiConfig: samples_per_symbol must be >= 1");
    if (spreading_factor < 1)
        throw config_error("SoiConfig: spreading_factor must be >= 1");
    if (is_dsss != (spreading_factor > 1))
        throw config_error("SoiConfig: spreading_factor > 1 iff is_dsss");
    if (num_bits <= 0 || num_bits % bits_per_symbol != 0)
        throw config_error("SoiConfig: num_bits must be positive and divisible "
                           "by bits_per_symbol");
    if (!(sample_rate_hz > 0.0))
        throw config_error("SoiConfig: sample_rate_hz must be positive");
}

InterferenceSpec InterferenceSpec::none() {
    InterferenceSpec s;
    s.kind = InterferenceKind::None;
    return s;
}

InterferenceSpec InterferenceSpec::tone(double freq_hz, double duty) {
    InterferenceSpec s;
    s.kind = InterferenceKind::Tone;
    s.tone_freq_hz = freq_hz;
    s.duty_cycle = duty;
    return s;
}

InterferenceSpec InterferenceSpec::chirp(double rate_hz_per_s, ChirpShape shape,
                                         double duty) {
    InterferenceSpec s;
    s.kind = InterferenceKind::Chirp;
    s.chirp_rate_hz_per_s = rate_hz_per_s;
    s.chirp_shape = shape;
    s.duty_cycle = duty;
    return s;
}

InterferenceSpec InterferenceSpec::filtered_noise(double a, double duty) {
    InterferenceSpec s;
    s.kind = InterferenceKind::FilteredNoise;
    s.filter_a = a;
    s.duty_cycle = duty;
    return s;
}

InterferenceSpec InterferenceSpec::modulated(int bps, int sps, double bw_ratio,
                                             double duty) {
    InterferenceSpec s;
    s.kind = InterferenceKind::UnknownModulated;
    s.mod_bps = bps;
    s.mod_sps = sps;
    s.mod_bw_ratio = bw_ratio;
    s.duty_cycle = duty;
    return s;
}

std::uint64_t chip_seed_of(std::uint64_t soi_seed) {
    return mix_seed(soi_seed, seed_tag::kChips);
}

std::vector<int> chip_sequence(int spreading_factor, std::uint64_t chip_seed) {
    if (spreading_factor < 1)
        throw config_error("chip_sequence: spreading_factor must be >= 1");
    std::vector<int> chips(static_cast<std::size_t>(spreading_factor), 1);
    if (spreading_factor > 1) {
        Rng rng(chip_seed);
        for (int& c : chips) c = rng.pm_one();
    }
    return chips;
}

SoiBlock gen_soi(const SoiConfig& cfg, std::uint64_t seed) {
    cfg.validate();


    SoiBlock out;
    out.bits.resize(static_cast<std::size_t>(cfg.num_bits));
    Rng bit_rng(mix_seed(seed, seed_tag::kBits));
    for (auto& b : out.bits) b = static_cast<std::uint8_t>(bit_rng.bounded(2));

    const auto chips = chip_sequence(cfg.spreading_factor, chip_seed_of(seed));

    out.signal.sample_rate_hz = cfg.sample_rate_hz;
    out.signal.samples.reserve(cfg.num_samples());
    const std::size_t num_symbols = out.bits.size() / cfg.bits_per_symbol;
    for (std::size_t s = 0; s < num_symbols; ++s) {
        cplx sym;
        if (cfg.bits_per_symbol == 1) {
            // bit 1 -> -1, bit 0 -> +1
            sym = cplx(out.bits[s] ? -1.0 : 1.0, 0.0);
        } else {
            double i = out.bits[2 * s] ? -kInvSqrt2 : kInvSqrt2;
            double q = out.bits[2 * s + 1] ? -kInvSqrt2 : kInvSqrt2;
            sym = cplx(i, q);
        }
        for (int chip : chips) {
            cplx v = sym * static_cast<double>(chip);
            for (int r = 0; r < cfg.samples_per_symbol; ++r)
                out.signal.samples.push_back(v);
        }
    }
    return out;
}

ComplexSignal gen_awgn(std::size_t n, std::uint64_t seed) {
    if (n == 0) throw config_error("gen_awgn: n must be > 0");
    ComplexSignal sig;
    sig.samples.resize(n);
    Rng rng(seed);
    const double scale = kInvSqrt2;
    for (auto& s : sig.samples) {
        double re = rng.gauss();
        double im = rng.gauss();
        s = cplx(re * scale, im * scale);
    }
    return sig;
}

cvec apply_fnoise_filter(const cvec& x, double a) {
    // y[n] = x[n] + (a-1) x[n-1] - a y[n-1]
    cvec y(x.size());
    cplx xprev = 0.0;
    cplx yprev = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        y[i] = x[i] + (a - 1.0) * xprev - a * yprev;
        xprev = x[i];
        yprev = y[i];
    }
    return y;
}

namespace {

void gate_and_normalize(cvec& v, double duty, Rng& duty_rng) {
    const std::size_t n = v.size();
    std::size_t on_len = n;
    std::size_t start = 0;
    if (duty < 1.0) {
        on_len = std::clamp<std::size_t>(
            static_cast<std::size_t>(std::llround(duty * static_cast<double>(n))),
            1, n);
        start = duty_rng.bounded(n - on_len + 1);
        std::fill(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(start), cplx(0.0));
        std::fill(v.begin() + static_cast<std::ptrdiff_t>(start + on_len), v.end(),
                  cplx(0.0));
    }
    double p = 0.0;
    for (std::size_t i = start; i < start + on_len; ++i) p += std::norm(v[i]);
    p /= static_cast<double>(on_len);
    if (p > 0.0) {
        const double g = 1.0 / std::sqrt(p);
        for (std::size_t i = start; i < start + on_len; ++i) v[i] *= g;
    }
}

} // namespace

ComplexSignal gen_interference(const InterferenceSpec& spec, std::size_t n,
                               double sample_rate_hz, std::uint64_t seed) {
    if (n == 0) throw config_error("gen_interference: n must be > 0");
    ComplexSignal sig;
    sig.sample_rate_hz = sample_rate_hz;
    sig.samples.assign(n, cplx(0.0));
    if (spec.kind == InterferenceKind::None) return sig;

    cvec& v = sig.samples;
    const double fs = sample_rate_hz;
    Rng gen_rng(mix_seed(seed, seed_tag::kNoiseGen));
    Rng carrier_rng(mix_seed(seed, seed_tag::kCarrier));

    switch (spec.kind) {
    case InterferenceKind::Tone: {
        const double w = kTwoPi * spec.tone_freq_hz / fs;
        for (std::size_t k = 0; k < n; ++k)
            v[k] = std::polar(1.0, w * static_cast<double>(k));
        break;
    }
    case InterferenceKind::Chirp: {
        const double gamma = spec.chirp_rate_hz_per_s;
        const double dur = static_cast<double>(n) / fs;
        if (spec.chirp_shape == ChirpShape::Linear) {
            // f(t) = f0 + gamma*t; sampling aliases the sweep in-band.
            const double f0 = carrier_rng.uniform(-fs / 2.0, fs / 2.0);
            for (std::size_t k = 0; k < n; ++k) {
                double t = static_cast<double>(k) / fs;
                double phase = kTwoPi * (f0 * t + 0.5 * gamma * t * t);
                v[k] = std::polar(1.0, phase);
            }
        } else {
            // f(t) = f0 e^{beta t}, beta chosen so the sweep span over
            // the block matches the linear case.
            const double f0 = carrier_rng.uniform(fs / 64.0, fs / 8.0);
            const double beta = std::log((f0 + gamma * dur) / f0) / dur;
            for (std::size_t k = 0; k < n; ++k) {
                double t = static_cast<double>(k) / fs;
                double phase = kTwoPi * f0 * (std::exp(beta * t) - 1.0) / beta;
                v[k] = std::polar(1.0, phase);
            }
        }
        break;
    }
    case InterferenceKind::FilteredNoise: {
        const std::size_t warmup = 256;
        cvec w(n + warmup);
        const double scale = kInvSqrt2;
        for (auto& s : w) s = cplx(gen_rng.gauss() * scale, gen_rng.gauss() * scale);
        cvec y = apply_fnoise_filter(w, spec.filter_a);
        std::copy(y.begin() + warmup, y.end(), v.begin());
        break;
    }
    case InterferenceKind::UnknownModulated: {
        // PSK at a symbol length set by the requested bandwidth ratio,
        // shifted to a random in-band center. mod_sps is carried as
        // metadata; the occupied bandwidth is what the contract pins.
        const double bw = std::clamp(spec.mod_bw_ratio, 1.0 / 64.0, 0.5);
        const int sps_i = std::clamp(static_cast<int>(std::lround(1.0 / bw)), 2, 64);
    
        const double fc = carrier_rng.uniform(-0.4 * fs, 0.4 * fs);
        const double wc = kTwoPi * fc / fs;
        std::size_t k = 0;
        while (k < n) {
            cplx sym;
            if (spec.mod_bps == 1) {
                sym = cplx(static_cast<double>(gen_rng.pm_one()), 0.0);
            } else {
                sym = cplx(gen_rng.pm_one() * kInvSqrt2, gen_rng.pm_one() * kInvSqrt2);
            }
            for (int r = 0; r < sps_i && k < n; ++r, ++k)
                v[k] = sym * std::polar(1.0, wc * static_cast<double>(k));
        }
        break;
    }
    case InterferenceKind::None:
        break;
    }

    Rng duty_rng(mix_seed(seed, seed_tag::kDuty));
    gate_and_normalize(v, spec.duty_cycle, duty_rng);
    return sig;
}

ComplexSignal mix(const ComplexSignal& soi, const ComplexSignal& interf,
                  const ComplexSignal& noise, double j2s_db, double snr_db) {
    const std::size_t n = soi.size();
    if (interf.size() != n || noise.size() != n)
        throw dimension_error("mix: signals must have equal length");

    const double p_soi = mean_power(soi.samples);

    // Interference power measured over its on-period only.
    double p_int = 0.0;
    std::size_t n_on = 0;
    for (const cplx& s : interf.samples) {
        if (s != cplx(0.0)) {
            p_int += std::norm(s);
            ++n_on;
        }
    }
    double g_i = 0.0;
    if (n_on > 0) {
        p_int /= static_cast<double>(n_on);
        g_i = std::sqrt(std::pow(10.0, j2s_db / 10.0) * p_soi / p_int);
    }

    const double p_noise = mean_power(noise.samples);
    const double g_n =
        std::sqrt(p_soi / (std::pow(10.0, snr_db / 10.0) * p_noise));

    ComplexSignal r;
    r.sample_rate_hz = soi.sample_rate_hz;
    r.samples.resize(n);
    for (std::size_t k = 0; k < n; ++k)
        r.samples[k] = soi.samples[k] + g_i * interf.samples[k] + g_n * noise.samples[k];
    return r;
}

} // namespace bp
