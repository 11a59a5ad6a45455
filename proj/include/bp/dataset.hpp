#pragma once

#include "bp/ber.hpp"
#include "bp/types.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bp {

inline constexpr int kNumFeatures = 14;
inline constexpr double kBerFloor = 1e-4;

/// Raw scenario settings of one trial; the ground-truth meta
/// information a classifier front-end would supply. Optional fields
/// are present only for the matching interference type.
struct MetaRecord {
    int modulation_rank = 1;     // bits per symbol, 1 or 2
    double j2s_db = 0.0;         // [-10, 10]
    double snr_db = 10.0;        // [8, 12]
    int interference_type = 1;   // 1 none, 2 tone, 3 chirp, 4 fnoise, 5 mod
    double duty_cycle = 1.0;     // [0.2, 1]
    std::optional<double> tone_freq_hz;    // (1e3, 2e4)
    std::optional<double> chirp_rate;      // (1e3, 5e5) Hz/s
    std::optional<int> mod_bps;            // 1 or 2
    std::optional<int> mod_sps;            // (100, 800)
    std::optional<double> mod_bw_ratio;    // (0.025, 0.25)
    std::optional<double> fnoise_bw_ratio; // (0.8, 8e3)
    int is_dsss = 0;

    void validate() const; // throws config_error
};

/// One labeled example: scenario plus the five measured BERs.
struct TrialRecord {
    MetaRecord meta;
    BerVector bers;
};

struct Dataset {
    std::vector<TrialRecord> records;
};

struct GenParams {
    int reps_per_cell = 100;
    std::vector<double> j2s_grid; // defaults to 20 points over [-10, 10]
    TrialParams trial;
    unsigned threads = 0; // 0 = hardware concurrency
};

std::vector<double> default_j2s_grid(int steps = 20, double lo = -10.0,
                                     double hi = 10.0);

/// Sweep the (J2S, SoI type) grid, reps_per_cell trials per cell with
/// randomly drawn interference; deterministic in seed regardless of
/// thread count.
Dataset generate(const GenParams& params, std::uint64_t seed);

/// Big-endian 3-bit encoding of the interference type, t in 1..5.
std::array<int, 3> encode_interference_type(int t);

/// 10*log10(max(ber, floor)).
double to_log_ber(double ber);

/// Per-target log-BER labels of one record.
std::array<double, kNumMitigations> target_vector(const BerVector& bers);

/// Imputation defaults (most frequent value, ties to the smallest) and
/// min-max ranges, learned from the training split only.
struct FeatureStats {
    // tone_f, chirp_rate, mod_bps, mod_sps, mod_bw, fn_bw
    std::array<double, 6> modes{};
    std::array<double, kNumFeatures> mins{};
    std::array<double, kNumFeatures> maxs{};
};

/// Feature names in vector order (interference type expanded to three
/// binary digits in place).
const std::array<std::string, kNumFeatures>& feature_names();

/// Mode of a column (most frequent value; ties broken toward the
/// smallest value).
double column_mode(const std::vector<double>& values);

/// Fill the optional fields of a record from the learned modes;
/// present values are never altered.
MetaRecord fill_missing(const MetaRecord& meta, const FeatureStats& stats);

/// Learn imputation modes and min-max ranges from training records.
FeatureStats fit_feature_stats(const std::vector<TrialRecord>& records,
                               const std::vector<int>& train_indices);

/// Impute, expand the type code, min-max normalize (clamped to [0,1]).
std::array<double, kNumFeatures> normalize_features(const MetaRecord& meta,
                                                    const FeatureStats& stats);

/// Seeded disjoint and exhaustive train/test split.
struct Split {
    std::vector<int> train;
    std::vector<int> test;
};
Split split_dataset(std::size_t n, double test_fraction, std::uint64_t seed);

void save_csv(const Dataset& ds, const std::string& path);
Dataset load_csv(const std::string& path);

} // namespace bp
