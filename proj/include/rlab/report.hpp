#pragma once

// Machine-readable output: versioned JSON reports and CSV solution dumps.
// Identical inputs produce byte-identical output.

#include <json.hpp>
#include <string>

#include "rlab/pipeline.hpp"

namespace rlab::report {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

Json verdict_json(const quad::IntegralVerdict& v);
Json criteria_json(const classify::CriteriaReport& c);
Json classify_json(const pipeline::Workspace& ws);
Json outcome_json(const pipeline::SolveOutcome& oc);
Json verification_json(const verify::VerificationReport& rep);

// Header `t,x,Dx`, one row per node, full decimal precision.
std::string solution_csv(const reproduce::Solution& sol);

std::string classify_table(const pipeline::Workspace& ws);
std::string verification_table(const verify::VerificationReport& rep);

}  // namespace rlab::report
