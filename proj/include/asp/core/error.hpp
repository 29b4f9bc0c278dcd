#pragma once

#include <stdexcept>
#include <string>

namespace asp {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Caller handed us something malformed (bad mesh, bad config, bad file).
class InvalidInputError : public Error {
public:
    using Error::Error;
};

// Geometric precondition violated (open mesh, degenerate data).
class GeometryError : public Error {
public:
    using Error::Error;
};

// A planning level failed (no sequence, no path, no contact).
class PlanningError : public Error {
public:
    using Error::Error;
};

// Training diverged (non-finite loss).
class TrainingError : public Error {
public:
    using Error::Error;
};

} // namespace asp
