#include "qgnls/error.hpp"

#include <sstream>

namespace qgnls {

Error::Error(std::string name, const std::string& what)
    : std::runtime_error(name + ": " + what), name_(std::move(name)) {}

ConfigError NonPositiveLength(const std::string& edge) {
  return {"NonPositiveLength", "edge '" + edge + "' must have a finite length > 0"};
}

ConfigError DisconnectedGraph(const std::string& vertex) {
  return {"DisconnectedGraph", "vertex '" + vertex + "' is not reachable from the first vertex"};
}

ConfigError EmptyGraph() { return {"EmptyGraph", "graph has no edges"}; }

ConfigError UnknownVertex(const std::string& vertex) {
  return {"UnknownVertex", "edge references undeclared vertex '" + vertex + "'"};
}

ConfigError InvalidArgument(const std::string& what) { return {"InvalidArgument", what}; }

ConfigError InvalidExponent(double q) {
  std::ostringstream os;
  os << "exponent q = " << q << " must satisfy q >= 1";
  return {"InvalidExponent", os.str()};
}

NumericalError ConvergenceFailure(const std::string& what) { return {"ConvergenceFailure", what}; }

NumericalError LinearSolveFailure(const std::string& what) { return {"LinearSolveFailure", what}; }

NumericalError RootBracketFailure(const std::string& equation) {
  return {"RootBracketFailure", "could not bracket a root of the defining equation for " + equation};
}

NumericalError DegeneratePairing(double value) {
  std::ostringstream os;
  os << "<u, xi> = " << value << " <= 0; the resolvent pairing must be positive for u != 0";
  return {"DegeneratePairing", os.str()};
}

NumericalError SamplingBudgetExceeded(const std::string& what) {
  return {"SamplingBudgetExceeded", what};
}

NumericalError InadmissibleIndex(int k) {
  return {"InadmissibleIndex",
          "index k = " + std::to_string(k) + " does not sit above a spectral gap (lambda_{k-1} = lambda_k)"};
}

NumericalError NoSignChangingFound(const std::string& diagnostics) {
  return {"NoSignChangingFound", diagnostics};
}

NumericalError OrderingViolation(const std::string& what) { return {"OrderingViolation", what}; }

NumericalError DuplicateSolution(const std::string& what) { return {"DuplicateSolution", what}; }

NumericalError BranchLost(double mu, const std::string& why) {
  std::ostringstream os;
  os << "continuation lost the branch at mu = " << mu << ": " << why;
  return {"BranchLost", os.str()};
}

NumericalError OracleUnavailable(const std::string& scenario) {
  return {"OracleUnavailable", "scenario '" + scenario + "' has no projection oracle"};
}

ConfigError MissingArtifact(const std::string& path) {
  return {"MissingArtifact", "artifact '" + path + "' does not exist or is not readable"};
}

}  // namespace qgnls
