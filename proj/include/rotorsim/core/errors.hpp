#pragma once

#include <stdexcept>
#include <string>

namespace rotorsim {

/// Bad arguments: non-finite values, violated preconditions, malformed files.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical solve could not produce an answer (no bracket, no convergence).
class SolverFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Least-squares problem without a unique solution.
class SingularFit : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Geometry that leads to a singular flapping balance.
class DegenerateGeometry : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class BundleInvalid : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inference requested before the history buffer filled up.
class NotReady : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Clock synchronisation found no convincing correlation peak.
class SyncFailure : public std::runtime_error {
public:
    SyncFailure(const std::string& what, double best_score)
        : std::runtime_error(what), best_score_(best_score) {}
    double best_score() const noexcept { return best_score_; }

private:
    double best_score_;
};

} // namespace rotorsim
