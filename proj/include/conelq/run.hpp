#pragma once

#include <string>

#include "conelq/config.hpp"

namespace conelq {

/// Executes one workflow mode and writes its artifacts into out_dir:
///   solve    -> solution.csv + summary.json
///   simulate -> simulate.json
///   verify   -> verify.json
///   oracle   -> oracle.json
///   gap      -> gap.json
/// Every run also writes metadata.json (timestamp, mode); the report files
/// themselves are byte-identical for identical (config, seed).
/// Returns 0 on success, 2 when a mathematical check fails. Operational
/// errors propagate as exceptions.
int run(const RunConfig& config, const std::string& out_dir);

}  // namespace conelq
