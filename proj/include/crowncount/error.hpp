#pragma once

#include <stdexcept>
#include <string>

namespace crowncount {

/// Problems with input data: unreadable files, corrupt encodings, malformed
/// documents, degenerate training sets. The CLI maps these to exit code 2.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public DataError {
public:
    using DataError::DataError;
};

class FormatError : public DataError {
public:
    using DataError::DataError;
};

/// A caller broke an operation's documented precondition.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline void require(bool condition, const std::string& message) {
    if (!condition) {
        throw PreconditionError(message);
    }
}

}  // namespace crowncount
