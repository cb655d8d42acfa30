#pragma once

#include <stdexcept>
#include <string>

namespace bpi {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input text; line is 1-based, 0 when not tied to a line.
class ParseError : public Error {
public:
    ParseError(int line, const std::string& what)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

// Evidence with zero probability.
class ImpossibleEvidence : public Error {
public:
    ImpossibleEvidence() : Error("impossible evidence: probability of the evidence is zero") {}
};

// Violated precondition of a library call (bad ids, scope mismatch, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

}  // namespace bpi
