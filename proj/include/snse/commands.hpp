#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "snse/config.hpp"

namespace snse {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitIo = 4;

struct CheckResult {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;
};

/// Test hook for the verify command: "convection-sign" flips the divergence term of the convection.
struct FaultInjection {
  bool convection_sign = false;
};

/// Skew symmetry, projection idempotence and constraint, A_h symmetry, manufactured Stokes order,
/// convection Jacobian consistency and the noise hypothesis sampler.
[[nodiscard]] std::vector<CheckResult> run_checks(const RunConfig& cfg, const FaultInjection& fault);

int cmd_verify(const RunConfig& cfg, const FaultInjection& fault, std::ostream& out, std::ostream& err);
int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_converge_time(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_converge_space(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_exceedance(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Parses arguments, loads the config, applies flag overrides and dispatches; returns the exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace snse
