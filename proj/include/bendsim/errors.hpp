#pragma once

#include <stdexcept>
#include <string>

namespace bendsim {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// geometry
struct DegenerateDisplacement : Error {
  explicit DegenerateDisplacement(const std::string& what) : Error(what) {}
};
struct CoincidentEndpoints : Error {
  explicit CoincidentEndpoints(const std::string& what) : Error(what) {}
};

// rod solver
struct TautRod : Error {
  explicit TautRod(const std::string& what) : Error(what) {}
};
struct NoConvergence : Error {
  explicit NoConvergence(const std::string& what) : Error(what) {}
};

// estimator
struct CovarianceBlowup : Error {
  explicit CovarianceBlowup(const std::string& what) : Error(what) {}
};

// simulation
struct DivergenceDetected : Error {
  explicit DivergenceDetected(const std::string& what) : Error(what) {}
};
struct UnavailableGroundTruth : Error {
  explicit UnavailableGroundTruth(const std::string& what) : Error(what) {}
};

// trajectory
struct PhaseOutOfRange : Error {
  explicit PhaseOutOfRange(const std::string& what) : Error(what) {}
};
struct DistanceBoundViolation : Error {
  explicit DistanceBoundViolation(const std::string& what) : Error(what) {}
};

// tooling
struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(what) {}
};
struct IoError : Error {
  explicit IoError(const std::string& what) : Error(what) {}
};
struct SchemaMismatch : Error {
  explicit SchemaMismatch(const std::string& what) : Error(what) {}
};

}  // namespace bendsim
