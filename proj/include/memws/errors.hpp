#pragma once

#include <stdexcept>
#include <string>

namespace memws {

// Bad inputs: invalid parameters, malformed files, violated preconditions.
// The CLI maps these to exit status 2.
class validation_error : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// A well-formed request that could not be computed (non-convergence,
// rank deficiency, degenerate data). CLI exit status 3.
class computation_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Fit failure that still carries the best residual reached.
class fit_error : public computation_error {
  public:
    fit_error(const std::string& what, double best_residual)
        : computation_error(what), residual(best_residual) {}
    double residual;
};

// File parse failure with a 1-based line number.
class parse_error : public validation_error {
  public:
    parse_error(const std::string& path, long line, const std::string& what)
        : validation_error(path + ":" + std::to_string(line) + ": " + what),
          line_number(line) {}
    long line_number;
};

}  // namespace memws
