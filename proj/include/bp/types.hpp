#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace bp {

using cplx = std::complex<double>;
using cvec = std::vector<cplx>;

/// Complex baseband sample block with its sample rate.
struct ComplexSignal {
    cvec samples;
    double sample_rate_hz = 1.0;

    std::size_t size() const { return samples.size(); }
};

/// Invalid configuration or parameter value.
struct config_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Mismatched lengths / shapes between operands.
struct dimension_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Operation undefined for the given signal class (e.g. transversal
/// filtering of a non-spread SoI).
struct not_applicable_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// File/schema problems when loading persisted artifacts.
struct schema_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double mean_power(const cvec& v) {
    if (v.empty()) return 0.0;
    double acc = 0.0;
    for (const cplx& s : v) acc += std::norm(s);
    return acc / static_cast<double>(v.size());
}

} // namespace bp
