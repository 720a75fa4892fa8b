#pragma once

#include <stdexcept>
#include <string>

namespace ebdiff {

// Base of every error raised by the library. The CLI maps these to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define EBDIFF_DEFINE_ERROR(Name)            \
  class Name : public Error {                \
   public:                                   \
    using Error::Error;                      \
  }

// topology
EBDIFF_DEFINE_ERROR(DisconnectedGraph);
EBDIFF_DEFINE_ERROR(InvalidEdge);
EBDIFF_DEFINE_ERROR(ConnectivityFailure);
// datamodel
EBDIFF_DEFINE_ERROR(InvalidRange);
// diffusion
EBDIFF_DEFINE_ERROR(MissingNeighborState);
// analysis
EBDIFF_DEFINE_ERROR(DimensionCapExceeded);
EBDIFF_DEFINE_ERROR(UnsupportedStructure);
EBDIFF_DEFINE_ERROR(UnstableConfiguration);
EBDIFF_DEFINE_ERROR(SingularWeighting);
EBDIFF_DEFINE_ERROR(UnstableF);
// metrics
EBDIFF_DEFINE_ERROR(ShapeMismatch);
EBDIFF_DEFINE_ERROR(HorizonTooShort);

#undef EBDIFF_DEFINE_ERROR

// Raised when an update produces NaN/Inf. Carries where it happened.
class NonFiniteUpdate : public Error {
 public:
  NonFiniteUpdate(int node, long instant, long replica = -1)
      : Error(describe(node, instant, replica)),
        node_(node),
        instant_(instant),
        replica_(replica) {}

  int node() const noexcept { return node_; }
  long instant() const noexcept { return instant_; }
  long replica() const noexcept { return replica_; }

  NonFiniteUpdate with_replica(long replica) const {
    return NonFiniteUpdate(node_, instant_, replica);
  }

 private:
  static std::string describe(int node, long instant, long replica) {
    std::string msg = "non-finite update at node " + std::to_string(node + 1) +
                      ", instant " + std::to_string(instant);
    if (replica >= 0) msg += ", replica " + std::to_string(replica);
    return msg;
  }

  int node_;
  long instant_;
  long replica_;
};

// Config file problems. `line` is 0 when the error is not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace ebdiff
