#include "bp/dataset.hpp"

#include "bp/parallel.hpp"
#include "bp/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace bp {

namespace {

constexpr std::uint64_t kRecordTag = 0x20;
constexpr std::uint64_t kDrawTag = 0x21;
constexpr std::uint64_t kTrialTag = 0x22;
constexpr std::uint64_t kSplitTag = 0x23;

const char* kCsvHeader =
    "mod_rank,j2s_db,snr_db,int_type,duty,tone_f,chirp_rate,mod_bps,mod_sps,"
    "mod_bw,fn_bw,dsss,ber_unmit,ber_fb,ber_tf,ber_notch,ber_frft";

std::string format_double(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, p);
}

double parse_double(const std::string& s, const char* what) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw schema_error(std::string("bad numeric field for ") + what + ": " + s);
    return v;
}

} // namespace

void MetaRecord::validate() const {
    if (modulation_rank != 1 && modulation_rank != 2)
        throw config_error("meta: modulation_rank must be 1 or 2");
    if (j2s_db < -10.0 || j2s_db > 10.0)
        throw config_error("meta: j2s_db out of [-10, 10]");
    if (snr_db < 8.0 || snr_db > 12.0)
        throw config_error("meta: snr_db out of [8, 12]");
    if (interference_type < 1 || interference_type > 5)
        throw config_error("meta: interference_type out of 1..5");
    if (duty_cycle < 0.2 || duty_cycle > 1.0)
        throw config_error("meta: duty_cycle out of [0.2, 1]");
    if (is_dsss != 0 && is_dsss != 1)
        throw config_error("meta: is_dsss must be 0 or 1");
    auto need = [&](bool present, const char* name, bool expected) {
        if (expected && !present)
            throw config_error(std::string("meta: missing required field ") + name);
    };
    const int t = interference_type;
    need(tone_freq_hz.has_value(), "tone_f", t == 2);
    need(chirp_rate.has_value(), "chirp_rate", t == 3);
    need(fnoise_bw_ratio.has_value(), "fn_bw", t == 4);
    need(mod_bps.has_value() && mod_sps.has_value() && mod_bw_ratio.has_value(),
         "mod_*", t == 5);
    if (tone_freq_hz && (*tone_freq_hz < 1e3 || *tone_freq_hz > 2e4))
        throw config_error("meta: tone_f out of (1e3, 2e4)");
    if (chirp_rate && (*chirp_rate < 1e3 || *chirp_rate > 5e5))
        throw config_error("meta: chirp_rate out of (1e3, 5e5)");
    if (mod_bps && *mod_bps != 1 && *mod_bps != 2)
        throw config_error("meta: mod_bps must be 1 or 2");
    if (mod_sps && (*mod_sps < 100 || *mod_sps > 800))
        throw config_error("meta: mod_sps out of (100, 800)");
    if (mod_bw_ratio && (*mod_bw_ratio < 0.025 || *mod_bw_ratio > 0.25))
        throw config_error("meta: mod_bw out of (0.025, 0.25)");
    if (fnoise_bw_ratio && (*fnoise_bw_ratio < 0.8 || *fnoise_bw_ratio > 8e3))
        throw config_error("meta: fn_bw out of (0.8, 8e3)");
}

std::vector<double> default_j2s_grid(int steps, double lo, double hi) {
    std::vector<double> grid(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i)
        grid[static_cast<std::size_t>(i)] =
            steps == 1 ? lo : lo + (hi - lo) * i / (steps - 1);
    return grid;
}

namespace {

MetaRecord draw_meta(double j2s, int dsss, std::uint64_t seed) {
    Rng rng(seed);
    MetaRecord m;
    m.j2s_db = j2s;
    m.is_dsss = dsss;
    m.interference_type = 1 + static_cast<int>(rng.bounded(5));
    m.duty_cycle = rng.uniform(0.2, 1.0);
    m.modulation_rank = 1 + static_cast<int>(rng.bounded(2));
    m.snr_db = rng.uniform(8.0, 12.0);
    switch (m.interference_type) {
    case 2:
        m.tone_freq_hz = rng.uniform(1e3, 2e4);
        break;
    case 3:
        m.chirp_rate = rng.log_uniform(1e3, 5e5);
        break;
    case 4:
        m.fnoise_bw_ratio = rng.log_uniform(0.8, 8e3);
        break;
    case 5:
        m.mod_bps = 1 + static_cast<int>(rng.bounded(2));
        m.mod_sps = 100 + static_cast<int>(rng.bounded(701));
        m.mod_bw_ratio = rng.uniform(0.025, 0.25);
        break;
    default:
        break;
    }
    return m;
}

} // namespace

Dataset generate(const GenParams& params, std::uint64_t seed) {
    if (params.reps_per_cell <= 0)
        throw config_error("generate: reps_per_cell must be > 0");
    const std::vector<double> grid =
        params.j2s_grid.empty() ? default_j2s_grid() : params.j2s_grid;
    const std::size_t total =
        grid.size() * 2 * static_cast<std::size_t>(params.reps_per_cell);

    Dataset ds;
    ds.records.resize(total);
    const unsigned threads =
        params.threads == 0 ? default_threads() : params.threads;
    parallel_for(total, threads, [&](std::size_t idx) {
        // idx = ((grid_i * 2) + dsss) * reps + rep
        const std::size_t reps = static_cast<std::size_t>(params.reps_per_cell);
        const std::size_t cell = idx / reps;
        const int dsss = static_cast<int>(cell % 2);
        const double j2s = grid[cell / 2];
        const std::uint64_t rec_seed = mix_seed(mix_seed(seed, kRecordTag), idx);
        TrialRecord& rec = ds.records[idx];
        rec.meta = draw_meta(j2s, dsss, mix_seed(rec_seed, kDrawTag));
        rec.bers = run_trial(rec.meta, mix_seed(rec_seed, kTrialTag), params.trial);
    });
    return ds;
}

std::array<int, 3> encode_interference_type(int t) {
    if (t < 1 || t > 5)
        throw config_error("encode_interference_type: t must be in 1..5");
    return {(t >> 2) & 1, (t >> 1) & 1, t & 1};
}

double to_log_ber(double ber) {
    return 10.0 * std::log10(std::max(ber, kBerFloor));
}

std::array<double, kNumMitigations> target_vector(const BerVector& bers) {
    std::array<double, kNumMitigations> t{};
    for (int i = 0; i < kNumMitigations; ++i) t[i] = to_log_ber(bers.ber[i]);
    return t;
}

const std::array<std::string, kNumFeatures>& feature_names() {
    static const std::array<std::string, kNumFeatures> names = {
        "mod_rank", "j2s_db", "snr_db", "type_b2", "type_b1", "type_b0",
        "duty",     "tone_f", "chirp_rate", "mod_bps", "mod_sps", "mod_bw",
        "fn_bw",    "dsss"};
    return names;
}

double column_mode(const std::vector<double>& values) {
    if (values.empty()) return 0.0;
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    double best = sorted[0];
    std::size_t best_count = 0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        if (j - i > best_count) { // strict: ties keep the smaller value
            best_count = j - i;
            best = sorted[i];
        }
        i = j;
    }
    return best;
}

MetaRecord fill_missing(const MetaRecord& meta, const FeatureStats& stats) {
    MetaRecord m = meta;
    if (!m.tone_freq_hz) m.tone_freq_hz = stats.modes[0];
    if (!m.chirp_rate) m.chirp_rate = stats.modes[1];
    if (!m.mod_bps) m.mod_bps = static_cast<int>(stats.modes[2]);
    if (!m.mod_sps) m.mod_sps = static_cast<int>(stats.modes[3]);
    if (!m.mod_bw_ratio) m.mod_bw_ratio = stats.modes[4];
    if (!m.fnoise_bw_ratio) m.fnoise_bw_ratio = stats.modes[5];
    return m;
}

namespace {

std::array<double, kNumFeatures> raw_features(const MetaRecord& m) {
    const auto bits = encode_interference_type(m.interference_type);
    return {static_cast<double>(m.modulation_rank),
            m.j2s_db,
            m.snr_db,
            static_cast<double>(bits[0]),
            static_cast<double>(bits[1]),
            static_cast<double>(bits[2]),
            m.duty_cycle,
            m.tone_freq_hz.value_or(0.0),
            m.chirp_rate.value_or(0.0),
            static_cast<double>(m.mod_bps.value_or(0)),
            static_cast<double>(m.mod_sps.value_or(0)),
            m.mod_bw_ratio.value_or(0.0),
            m.fnoise_bw_ratio.value_or(0.0),
            static_cast<double>(m.is_dsss)};
}

// Binary columns pass through normalization untouched.
bool is_passthrough(int feature) {
    return feature == 3 || feature == 4 || feature == 5 || feature == 13;
}

} // namespace

FeatureStats fit_feature_stats(const std::vector<TrialRecord>& records,
                               const std::vector<int>& train_indices) {
    FeatureStats stats;
    std::array<std::vector<double>, 6> present;
    for (int idx : train_indices) {
        const MetaRecord& m = records[static_cast<std::size_t>(idx)].meta;
        if (m.tone_freq_hz) present[0].push_back(*m.tone_freq_hz);
        if (m.chirp_rate) present[1].push_back(*m.chirp_rate);
        if (m.mod_bps) present[2].push_back(static_cast<double>(*m.mod_bps));
        if (m.mod_sps) present[3].push_back(static_cast<double>(*m.mod_sps));
        if (m.mod_bw_ratio) present[4].push_back(*m.mod_bw_ratio);
        if (m.fnoise_bw_ratio) present[5].push_back(*m.fnoise_bw_ratio);
    }
    for (std::size_t i = 0; i < present.size(); ++i)
        stats.modes[i] = column_mode(present[i]);

    bool first = true;
    for (int idx : train_indices) {
        MetaRecord filled =
            fill_missing(records[static_cast<std::size_t>(idx)].meta, stats);
        const auto row = raw_features(filled);
        for (int f = 0; f < kNumFeatures; ++f) {
            if (first || row[f] < stats.mins[f]) stats.mins[f] = row[f];
            if (first || row[f] > stats.maxs[f]) stats.maxs[f] = row[f];
        }
        first = false;
    }
    return stats;
}

std::array<double, kNumFeatures> normalize_features(const MetaRecord& meta,
                                                    const FeatureStats& stats) {
    const MetaRecord filled = fill_missing(meta, stats);
    auto row = raw_features(filled);
    for (int f = 0; f < kNumFeatures; ++f) {
        if (is_passthrough(f)) continue;
        const double lo = stats.mins[f], hi = stats.maxs[f];
        if (hi > lo) {
            row[f] = std::clamp((row[f] - lo) / (hi - lo), 0.0, 1.0);
        } else {
            row[f] = 0.0; // degenerate feature
        }
    }
    return row;
}

Split split_dataset(std::size_t n, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction >= 0.0 && test_fraction < 1.0))
        throw config_error("split: test_fraction must be in [0, 1)");
    std::vector<int> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);
    Rng rng(mix_seed(seed, kSplitTag));
    for (std::size_t i = n; i > 1; --i) {
        std::size_t j = rng.bounded(i);
        std::swap(order[i - 1], order[j]);
    }
    const std::size_t n_test =
        static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
    Split s;
    s.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
    s.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
    return s;
}

void save_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_csv: cannot open " + path);
    out << kCsvHeader << "\n";
    auto opt = [](const std::optional<double>& v) {
        return v ? format_double(*v) : std::string();
    };
    auto opti = [](const std::optional<int>& v) {
        return v ? std::to_string(*v) : std::string();
    };
    for (const TrialRecord& r : ds.records) {
        const MetaRecord& m = r.meta;
        out << m.modulation_rank << ',' << format_double(m.j2s_db) << ','
            << format_double(m.snr_db) << ',' << m.interference_type << ','
            << format_double(m.duty_cycle) << ',' << opt(m.tone_freq_hz) << ','
            << opt(m.chirp_rate) << ',' << opti(m.mod_bps) << ','
            << opti(m.mod_sps) << ',' << opt(m.mod_bw_ratio) << ','
            << opt(m.fnoise_bw_ratio) << ',' << m.is_dsss;
        for (int k = 0; k < kNumMitigations; ++k)
            out << ',' << format_double(r.bers.ber[k]);
        out << '\n';
    }
    if (!out) throw std::runtime_error("save_csv: write failed for " + path);
}

Dataset load_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw schema_error("load_csv: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader)
        throw schema_error("load_csv: unexpected header: " + line);

    Dataset ds;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::string cur;
        std::stringstream ss(line);
        while (std::getline(ss, cur, ',')) cols.push_back(cur);
        if (line.back() == ',') cols.push_back("");
        if (cols.size() != 17)
            throw schema_error("load_csv: line " + std::to_string(line_no) +
                               " has " + std::to_string(cols.size()) +
                               " columns, expected 17");
        TrialRecord r;
        MetaRecord& m = r.meta;
        m.modulation_rank = static_cast<int>(parse_double(cols[0], "mod_rank"));
        m.j2s_db = parse_double(cols[1], "j2s_db");
        m.snr_db = parse_double(cols[2], "snr_db");
        m.interference_type = static_cast<int>(parse_double(cols[3], "int_type"));
        m.duty_cycle = parse_double(cols[4], "duty");
        if (!cols[5].empty()) m.tone_freq_hz = parse_double(cols[5], "tone_f");
        if (!cols[6].empty()) m.chirp_rate = parse_double(cols[6], "chirp_rate");
        if (!cols[7].empty())
            m.mod_bps = static_cast<int>(parse_double(cols[7], "mod_bps"));
        if (!cols[8].empty())
            m.mod_sps = static_cast<int>(parse_double(cols[8], "mod_sps"));
        if (!cols[9].empty()) m.mod_bw_ratio = parse_double(cols[9], "mod_bw");
        if (!cols[10].empty()) m.fnoise_bw_ratio = parse_double(cols[10], "fn_bw");
        m.is_dsss = static_cast<int>(parse_double(cols[11], "dsss"));
        for (int k = 0; k < kNumMitigations; ++k)
            r.bers.ber[k] = parse_double(cols[12 + k], "ber");
        ds.records.push_back(std::move(r));
    }
    return ds;
}

} // namespace bp
