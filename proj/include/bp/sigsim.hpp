#pragma once

#include "bp/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace bp {

/// Signal-of-interest parameters. Rectangular pulses, PSK symbols,
/// optional direct-sequence spreading with a seeded +/-1 chip code.
struct SoiConfig {
    int bits_per_symbol = 1;    // 1 = BPSK, 2 = Gray QPSK
    int samples_per_symbol = 1; // samples per chip
    bool is_dsss = false;
    int spreading_factor = 1;   // chips per symbol; 1 iff not DSSS
    int num_bits = 10000;
    double sample_rate_hz = 48000.0;

    /// Total sample count implied by the config.
    std::size_t num_samples() const;
    /// Throws config_error when any invariant is violated.
    void validate() const;
};

enum class InterferenceKind : int {
    None = 1,
    Tone = 2,
    Chirp = 3,
    FilteredNoise = 4,
    UnknownModulated = 5,
};

enum class ChirpShape { Linear, Exponential };

/// Parameters of one interference realization. Only fields of the
/// active kind are meaningful; the rest stay disengaged.
struct InterferenceSpec {
    InterferenceKind kind = InterferenceKind::None;
    double duty_cycle = 1.0; // [0.2, 1]; fraction of the block gated on

    // Tone
    double tone_freq_hz = 0.0;
    // Chirp
    double chirp_rate_hz_per_s = 0.0;
    ChirpShape chirp_shape = ChirpShape::Linear;
    // FilteredNoise: H(z) = (1 + (a-1) z^-1) / (1 + a z^-1), a in (0,1)
    double filter_a = 0.5;
    // UnknownModulated
    int mod_bps = 1;
    int mod_sps = 100;
    double mod_bw_ratio = 0.1; // occupied fraction of the SoI bandwidth

    static InterferenceSpec none();
    static InterferenceSpec tone(double freq_hz, double duty = 1.0);
    static InterferenceSpec chirp(double rate_hz_per_s, ChirpShape shape,
                                  double duty = 1.0);
    static InterferenceSpec filtered_noise(double a, double duty = 1.0);
    static InterferenceSpec modulated(int bps, int sps, double bw_ratio,
                                      double duty = 1.0);
};

/// Transmit bits and the unit-power modulated (and optionally spread)
/// baseband signal. Deterministic in (cfg, seed).
struct SoiBlock {
    std::vector<std::uint8_t> bits;
    ComplexSignal signal;
};

SoiBlock gen_soi(const SoiConfig& cfg, std::uint64_t seed);

/// The +/-1 spreading code used by gen_soi and the despreader.
std::vector<int> chip_sequence(int spreading_factor, std::uint64_t chip_seed);

/// Seed for the chip stream, so modulator and demodulator derive the
/// same code from the SoI seed.
std::uint64_t chip_seed_of(std::uint64_t soi_seed);

/// One interference block of n samples, unit mean power over its
/// on-period (all-zero for kind None).
ComplexSignal gen_interference(const InterferenceSpec& spec, std::size_t n,
                               double sample_rate_hz, std::uint64_t seed);

/// Circularly-symmetric complex white Gaussian noise, unit mean power.
ComplexSignal gen_awgn(std::size_t n, std::uint64_t seed);

/// r = x + g_i*i + g_n*n with gains set from measured powers so that
/// the interference on-period power is 10^(j2s_db/10) times the SoI
/// power and the SoI-to-noise ratio is snr_db.
ComplexSignal mix(const ComplexSignal& soi, const ComplexSignal& interf,
                  const ComplexSignal& noise, double j2s_db, double snr_db);

/// The filtered-noise shaping filter by itself (exposed for tests).
cvec apply_fnoise_filter(const cvec& x, double a);

namespace seed_tag {
inline constexpr std::uint64_t kBits = 0x01;
inline constexpr std::uint64_t kChips = 0x02;
inline constexpr std::uint64_t kNoiseGen = 0x03;
inline constexpr std::uint64_t kDuty = 0x04;
inline constexpr std::uint64_t kCarrier = 0x05;
} // namespace seed_tag

} // namespace bp
