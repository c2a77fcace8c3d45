#pragma once

#include <stdexcept>
#include <string>

namespace quizpipe {

// Bad input data: CSV schema/row problems, type-invariant or precondition
// violations. Maps to exit code 1 in the CLI.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent configuration (files or in-memory plans).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Filesystem failures (open/read/write).
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Adapter/port failures (STT, classifier, QA, TTS). Maps to exit code 2.
class BackendError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace quizpipe
