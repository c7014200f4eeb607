#pragma once

#include <string>
#include <vector>

#include "delcode/nn/network.hpp"

namespace delcode {

/// Drift-lattice LLRs against exhaustive enumeration on random small frames.
struct OracleReport {
    long instances = 0;
    double max_abs_deviation = 0.0;
    long failures = 0;
    double tolerance = 1e-9;
    bool pass() const { return failures == 0 && instances > 0; }
};

struct OracleSuiteConfig {
    long instances = 1000;
    std::size_t max_length = 12;
    std::vector<double> pd{0.0, 0.05, 0.2};
    std::vector<double> ps{0.0, 0.05, 0.2};
    double tolerance = 1e-9;
};

OracleReport run_oracle_suite(const OracleSuiteConfig& cfg, std::uint64_t seed);

/// Central finite differences over every parameter of a double-precision
/// network in training mode with a BCE loss on random labels.
struct GradcheckResult {
    std::string model;
    std::size_t parameters = 0;
    double max_rel_error = 0.0;
    std::string worst;  ///< "tensor[index]" of the largest error
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
};

struct GradcheckConfig {
    nn::NetConfig net;
    int T = 6;
    int B = 2;
    double step = 1e-5;
    /// Denominator floor: |a - fd| / max(|a|, |fd|, floor).
    double floor = 1e-6;
};

GradcheckResult gradient_check(const std::string& name, const GradcheckConfig& cfg, std::uint64_t seed);

/// Desk-scale estimator and decoder architectures used by the desk configs.
nn::NetConfig desk_estimator_net();
nn::NetConfig desk_decoder_net();

}  // namespace delcode
