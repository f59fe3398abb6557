#pragma once

#include <string>
#include <string_view>

#include "qsim/engine/table.hpp"

namespace qsim::engine {

/// The seam the simulator drives. In-process reference engines implement it
/// today; a networked Trino/Hive client would slot in behind the same two
/// calls. Implementations must tolerate concurrent execute_sql calls.
class EngineAdapter {
public:
    virtual ~EngineAdapter() = default;

    virtual std::string name() const = 0;

    /// Parses and runs one statement. Throws qsim::Error on failure.
    virtual ExecutionResult execute_sql(const std::string& sql, std::string_view session) = 0;
};

} // namespace qsim::engine
