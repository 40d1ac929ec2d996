#pragma once

#include <stdexcept>
#include <string>

namespace heatlab {

// Error taxonomy mirrors the CLI exit codes: parse(1), infeasible(2),
// budget(3), non-convergence(4), invalid spec(5).
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : Error {
    using Error::Error;
};

struct Infeasible : Error {
    using Error::Error;
};

// A requested parameter set cannot satisfy the strict medium inequality.
struct NotSatisfiable : Infeasible {
    using Infeasible::Infeasible;
};

struct BudgetExceeded : Error {
    using Error::Error;
};

struct NonConvergence : Error {
    using Error::Error;
};

struct InvalidSpec : Error {
    using Error::Error;
};

struct PNotInRegion : InvalidSpec {
    using InvalidSpec::InvalidSpec;
};

struct AntipodeInRegion : InvalidSpec {
    using InvalidSpec::InvalidSpec;
};

} // namespace heatlab
