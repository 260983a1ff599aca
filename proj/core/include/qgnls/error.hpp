#pragma once

#include <stdexcept>
#include <string>

namespace qgnls {

/// Base class for every error raised by the library. `name()` is a stable
/// identifier (e.g. "NonPositiveLength") that the CLI prints and maps to an
/// exit code.
class Error : public std::runtime_error {
 public:
  Error(std::string name, const std::string& what);
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

/// Invalid input detected before any numerics ran (graph files, options,
/// preconditions).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure could not deliver its contract.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Graph validation
ConfigError NonPositiveLength(const std::string& edge);
ConfigError DisconnectedGraph(const std::string& vertex);
ConfigError EmptyGraph();
ConfigError UnknownVertex(const std::string& vertex);

ConfigError InvalidArgument(const std::string& what);
ConfigError InvalidExponent(double q);

NumericalError ConvergenceFailure(const std::string& what);
NumericalError LinearSolveFailure(const std::string& what);
NumericalError RootBracketFailure(const std::string& equation);
NumericalError DegeneratePairing(double value);
NumericalError SamplingBudgetExceeded(const std::string& what);
NumericalError InadmissibleIndex(int k);
NumericalError NoSignChangingFound(const std::string& diagnostics);
NumericalError OrderingViolation(const std::string& what);
NumericalError DuplicateSolution(const std::string& what);
NumericalError BranchLost(double mu, const std::string& why);
NumericalError OracleUnavailable(const std::string& scenario);

// CLI artifacts
ConfigError MissingArtifact(const std::string& path);

}  // namespace qgnls
