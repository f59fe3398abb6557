#include "qsim/engine/faults.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qsim/error.hpp"

namespace qsim::engine {

using nlohmann::json;

FaultConfig fault_config_from_json(const std::string& text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw Error(ErrorCode::IoError, "fault config is not valid JSON");
    }
    try {
        FaultConfig cfg;
        if (doc.contains("latency_multiplier")) {
            for (auto it = doc["latency_multiplier"].begin();
                 it != doc["latency_multiplier"].end(); ++it) {
                double factor = it.value().get<double>();
                if (factor <= 0) throw Error(ErrorCode::IoError, "latency factor must be > 0");
                cfg.latency_multiplier[it.key()] = factor;
            }
        }
        cfg.coercion_bug = doc.value("coercion_bug", false);
        cfg.tie_break_flip = doc.value("tie_break_flip", false);
        cfg.float_reverse_sum = doc.value("float_reverse_sum", false);
        if (doc.contains("scan_amplify")) {
            for (auto it = doc["scan_amplify"].begin(); it != doc["scan_amplify"].end(); ++it) {
                double factor = it.value().get<double>();
                if (factor <= 0) throw Error(ErrorCode::IoError, "scan factor must be > 0");
                cfg.scan_amplify[it.key()] = factor;
            }
        }
        return cfg;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::IoError, std::string("malformed fault config: ") + e.what());
    }
}

FaultConfig load_fault_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return fault_config_from_json(ss.str());
}

} // namespace qsim::engine
