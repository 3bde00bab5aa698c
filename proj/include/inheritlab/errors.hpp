#pragma once

#include <stdexcept>
#include <string>

namespace inheritlab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularMetric : Error {
  using Error::Error;
};
struct OutsideChart : Error {
  using Error::Error;
};
struct SolverFailure : Error {
  using Error::Error;
};
struct FrequencyUndefined : Error {
  using Error::Error;
};
struct AnsatzInconsistency : Error {
  using Error::Error;
};
struct InvalidInput : Error {
  using Error::Error;
};

}  // namespace inheritlab
