#ifndef ADMG_ERROR_HPP
#define ADMG_ERROR_HPP

#include <stdexcept>
#include <string>

namespace admg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed caller input: unknown node, overlapping sets, bad query shape.
class InputError : public Error {
public:
    using Error::Error;
};

/// Violation of a structural invariant (self-loop, duplicate edge, directed cycle).
class GraphError : public Error {
public:
    using Error::Error;
};

/// Text that does not follow one of the file grammars.
class ParseError : public Error {
public:
    ParseError(const std::string& what, int line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

/// An estimand outside the conditional-linear-Gaussian fragment.
class UnsupportedExpression : public Error {
public:
    using Error::Error;
};

class ConfigurationError : public Error {
public:
    using Error::Error;
};

/// No candidate graph satisfies the hard dependence constraints.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

} // namespace admg

#endif // ADMG_ERROR_HPP
