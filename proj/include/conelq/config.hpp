#pragma once

#include <string>

#include "conelq/cone.hpp"
#include "conelq/cone_qrm.hpp"
#include "conelq/conjugates.hpp"
#include "conelq/market.hpp"
#include "conelq/oracle.hpp"
#include "conelq/sde_sim.hpp"

namespace conelq {

enum class Mode { Solve, Simulate, Verify, Oracle, Gap };

std::string mode_name(Mode mode);

struct OracleConfig {
  DPConfig dp;
  int n_steps = 200;  // DP grid, independent of the problem grid
};

struct Tolerances {
  double check = 1e-6;      // optimality-condition tolerance (verify mode)
  double gap_sigmas = 3.0;  // duality-gap acceptance band in stderr units
};

/// Fully validated run description: problem instance, simulation settings,
/// oracle settings and tolerances. Built only through parse_config.
struct RunConfig {
  int schema_version;
  Mode mode;
  ConeQRMProblem problem;
  QuadraticCost cost;
  SimConfig sim;
  OracleConfig oracle;
  Tolerances tol;
};

/// Parses and validates a UTF-8 JSON run configuration. Unknown fields are
/// rejected with the offending path in the SchemaError message; structurally
/// valid but out-of-range values raise ConfigValueError.
RunConfig parse_config(const std::string& text);

}  // namespace conelq
