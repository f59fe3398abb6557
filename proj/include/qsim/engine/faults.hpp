#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace qsim::engine {

/// Deliberate, configurable deviations for the "test" engine, used to
/// validate that the simulator detects correctness and performance
/// regressions. Pattern keys match the signature body of the customer
/// query exactly (digest wrapping and write redirection are unwrapped
/// before matching).
struct FaultConfig {
    std::map<std::string, double> latency_multiplier; // signature body -> wall_ms factor
    bool coercion_bug = false;      // string->bigint coercion yields NULL
    bool tie_break_flip = false;    // max_by/min_by ties pick the other extreme
    bool float_reverse_sum = false; // float sum/avg accumulate in reverse row order
    std::map<std::string, double> scan_amplify; // signature body -> partitions factor

    bool empty() const {
        return latency_multiplier.empty() && !coercion_bug && !tie_break_flip &&
               !float_reverse_sum && scan_amplify.empty();
    }
};

FaultConfig fault_config_from_json(const std::string& text);
FaultConfig load_fault_config(const std::filesystem::path& path);

} // namespace qsim::engine
