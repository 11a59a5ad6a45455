#include "bp/ber.hpp"

#include "bp/dataset.hpp"
#include "bp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace bp {

std::vector<std::uint8_t> demodulate(const ComplexSignal& sig, const SoiConfig& cfg,
                                     std::uint64_t chip_seed) {
    cfg.validate();
    if (sig.size() != cfg.num_samples())
        throw dimension_error("demodulate: signal length inconsistent with config");

    const auto chips = chip_sequence(cfg.spreading_factor, chip_seed);
    const int sps = cfg.samples_per_symbol;
    const std::size_t num_symbols =
        static_cast<std::size_t>(cfg.num_bits) / cfg.bits_per_symbol;

    std::vector<std::uint8_t> bits;
    bits.reserve(static_cast<std::size_t>(cfg.num_bits));
    std::size_t pos = 0;
    for (std::size_t s = 0; s < num_symbols; ++s) {
        cplx acc = 0.0;
        for (int chip : chips) {
            for (int r = 0; r < sps; ++r)
                acc += sig.samples[pos++] * static_cast<double>(chip);
        }
        if (cfg.bits_per_symbol == 1) {
            bits.push_back(acc.real() < 0.0 ? 1 : 0);
        } else {
            bits.push_back(acc.real() < 0.0 ? 1 : 0);
            bits.push_back(acc.imag() < 0.0 ? 1 : 0);
        }
    }
    return bits;
}

double compute_ber(const std::vector<std::uint8_t>& tx,
                   const std::vector<std::uint8_t>& rx) {
    if (tx.size() != rx.size() || tx.empty())
        throw dimension_error("compute_ber: sequences must have equal nonzero length");
    std::size_t errors = 0;
    for (std::size_t i = 0; i < tx.size(); ++i)
        if (tx[i] != rx[i]) ++errors;
    return static_cast<double>(errors) / static_cast<double>(tx.size());
}

double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

BerVector run_trial(const MetaRecord& meta, std::uint64_t seed,
                    const TrialParams& params) {
    meta.validate();

    SoiConfig cfg;
    cfg.bits_per_symbol = meta.modulation_rank;
    cfg.samples_per_symbol = params.samples_per_symbol;
    cfg.is_dsss = meta.is_dsss != 0;
    cfg.spreading_factor = cfg.is_dsss ? params.dsss_spreading_factor : 1;
    cfg.num_bits = params.num_bits;
    cfg.sample_rate_hz = params.sample_rate_hz;
    if (cfg.num_bits % cfg.bits_per_symbol != 0) ++cfg.num_bits;

    const std::uint64_t soi_seed = mix_seed(seed, seed_tag::kSoi);
    SoiBlock soi = gen_soi(cfg, soi_seed);
    const std::size_t n = soi.signal.size();

    InterferenceSpec spec;
    spec.duty_cycle = meta.duty_cycle;
    switch (static_cast<InterferenceKind>(meta.interference_type)) {
    case InterferenceKind::None:
        spec = InterferenceSpec::none();
        break;
    case InterferenceKind::Tone:
        spec = InterferenceSpec::tone(meta.tone_freq_hz.value(), meta.duty_cycle);
        break;
    case InterferenceKind::Chirp: {
        Rng shape_rng(mix_seed(seed, seed_tag::kShape));
        ChirpShape shape =
            shape_rng.bounded(2) == 0 ? ChirpShape::Linear : ChirpShape::Exponential;
        spec = InterferenceSpec::chirp(meta.chirp_rate.value(), shape,
                                       meta.duty_cycle);
        break;
    }
    case InterferenceKind::FilteredNoise: {
        // Wider requested bandwidth ratio -> pole further from the unit
        // circle -> wider noise band.
        const double ratio = meta.fnoise_bw_ratio.value();
        const double a = std::clamp(1.0 - std::numbers::pi / ratio, 0.02, 0.9995);
        spec = InterferenceSpec::filtered_noise(a, meta.duty_cycle);
        break;
    }
    case InterferenceKind::UnknownModulated:
        spec = InterferenceSpec::modulated(meta.mod_bps.value(), meta.mod_sps.value(),
                                           meta.mod_bw_ratio.value(),
                                           meta.duty_cycle);
        break;
    }

    ComplexSignal interf = gen_interference(
        spec, n, cfg.sample_rate_hz, mix_seed(seed, seed_tag::kInterference));
    ComplexSignal noise = gen_awgn(n, mix_seed(seed, seed_tag::kAwgn));
    ComplexSignal rx = mix(soi.signal, interf, noise, meta.j2s_db, meta.snr_db);

    BerVector out;
    for (MitigationKind kind : kAllMitigations) {
        if (kind == MitigationKind::Transversal && !cfg.is_dsss) {
            out[kind] = 0.5;
            continue;
        }
        ComplexSignal mitigated = mitigate(rx, kind, cfg);
        auto rx_bits = demodulate(mitigated, cfg, chip_seed_of(soi_seed));
        out[kind] = std::clamp(compute_ber(soi.bits, rx_bits), 0.0, 0.5);
    }
    return out;
}

} // namespace bp
