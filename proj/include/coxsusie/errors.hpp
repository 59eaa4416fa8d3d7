#ifndef COXSUSIE_ERRORS_HPP
#define COXSUSIE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace coxsusie {

// Non-finite or out-of-range values in a numeric argument.
struct InvalidArgumentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Input shapes disagree (e.g. genotype rows vs. phenotype rows).
struct DimensionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Data carry no usable information (e.g. zero observed events).
struct DegenerateDataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Rank-deficient design matrix in a multi-covariate fit.
struct SingularDesignError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input file; message names the offending row/column.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace coxsusie

#endif
