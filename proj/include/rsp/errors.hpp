#pragma once

#include <stdexcept>
#include <string>

#include "rsp/types.hpp"

namespace rsp {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input file (bad JSON, duplicate edge, index out of range, ...).
struct ParseError : Error {
    using Error::Error;
};

/// A non-goal node has no outgoing edge.
struct DanglingNodeError : Error {
    explicit DanglingNodeError(Index node_1based)
        : Error("dangling node " + std::to_string(node_1based) +
                ": no outgoing edge and not the goal"),
          node(node_1based) {}
    Index node;
};

/// The backward system (I - W) z = e_goal has no valid solution; the goal is
/// not reachable under the support of W.
struct NotAbsorbingError : Error {
    using Error::Error;
};

struct MaxIterExceededError : Error {
    MaxIterExceededError(std::string what, Index iterations, Real residual)
        : Error(std::move(what)), iterations(iterations), residual(residual) {}
    Index iterations;
    Real residual;
};

/// exp(-theta c) underflowed to zero on an existing edge; the linear-algebra
/// route is unusable at this theta, use the fixed-point solver instead.
struct UnderflowAtThetaError : Error {
    explicit UnderflowAtThetaError(Real theta)
        : Error("exp(-theta*cost) underflows at theta=" + std::to_string(theta) +
                "; use the fixedpoint solver"),
          theta(theta) {}
    Real theta;
};

/// A zero weight gamma_i where the target distribution puts mass q_i > 0.
struct ZeroGammaError : Error {
    explicit ZeroGammaError(Index index)
        : Error("zero gamma at position " + std::to_string(index) +
                " with positive target probability"),
          index(index) {}
    Index index;
};

struct SingularSystemError : Error {
    using Error::Error;
};

} // namespace rsp
