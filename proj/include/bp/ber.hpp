#pragma once

#include "bp/mitigate.hpp"
#include "bp/sigsim.hpp"
#include "bp/types.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace bp {

/// Measured (or predicted) BER per mitigation path, indexed by
/// MitigationKind ordinal.
struct BerVector {
    std::array<double, kNumMitigations> ber{};

    double& operator[](MitigationKind k) { return ber[static_cast<int>(k)]; }
    double operator[](MitigationKind k) const { return ber[static_cast<int>(k)]; }
};

/// Matched-filter demodulation: integrate-and-dump over each symbol,
/// despread with the seeded chip code when the SoI is DSSS, hard
/// decisions, Gray demapping. The demodulator is genie-aligned (no
/// carrier or timing recovery; the model has no offsets).
std::vector<std::uint8_t> demodulate(const ComplexSignal& sig, const SoiConfig& cfg,
                                     std::uint64_t chip_seed);

/// Hamming distance / length.
double compute_ber(const std::vector<std::uint8_t>& tx,
                   const std::vector<std::uint8_t>& rx);

/// Knobs of one simulated trial that are not part of the scenario
/// meta-information (fixed generator constants at dataset scale).
struct TrialParams {
    int num_bits = 10000;
    double sample_rate_hz = 48000.0;
    int samples_per_symbol = 1; // per chip
    int dsss_spreading_factor = 8;
};

struct MetaRecord; // dataset.hpp

/// Build SoI + interference + noise from the scenario description,
/// run every mitigation path on the same received block, measure the
/// five BERs (clamped to [0, 0.5]). Transversal on a narrowband SoI is
/// 0.5 by definition, without invoking the filter.
BerVector run_trial(const MetaRecord& meta, std::uint64_t seed,
                    const TrialParams& params = {});

/// Gaussian tail probability, the closed-form BER oracle.
double q_function(double x);

namespace seed_tag {
inline constexpr std::uint64_t kSoi = 0x10;
inline constexpr std::uint64_t kInterference = 0x11;
inline constexpr std::uint64_t kAwgn = 0x12;
inline constexpr std::uint64_t kShape = 0x13;
} // namespace seed_tag

} // namespace bp
