#pragma once

#include <stdexcept>
#include <string>

namespace hpiconv {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A requested CSV column does not exist.
class MissingColumnError : public Error {
public:
    using Error::Error;
};

/// A quarterly sequence has a gap or duplicate date.
class ContiguityError : public Error {
public:
    using Error::Error;
};

/// A value lies outside the domain of the operation (e.g., a non-positive index level).
class DomainError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// Two series that must share start date and length do not.
class AlignmentError : public Error {
public:
    using Error::Error;
};

/// Rank-deficient design or otherwise singular linear system.
class SingularityError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

}  // namespace hpiconv
