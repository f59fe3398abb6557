#pragma once

#include <map>
#include <string>

#include "qsim/engine/engine.hpp"
#include "qsim/sql/plan.hpp"

namespace qsim::engine::detail {

struct ExecInput {
    ReferenceEngine& engine;
    std::map<std::string, TablePtr> catalog; // folded name -> snapshot
    const FaultConfig* faults = nullptr;
    DigestOptions digest;
};

ExecutionResult run_plan(ExecInput input, const sql::PlanPtr& plan);

} // namespace qsim::engine::detail
