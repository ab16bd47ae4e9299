#pragma once

#include <stdexcept>
#include <string>

namespace qocr {

// Base for every error raised by the library. `kind()` is a short stable tag
// used by the CLI when it prints a machine-parsable failure line.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

struct DimensionError : Error {
    explicit DimensionError(const std::string& m) : Error("dimension", m) {}
};

struct NonFiniteError : Error {
    explicit NonFiniteError(const std::string& m) : Error("non_finite", m) {}
};

struct ArgumentError : Error {
    explicit ArgumentError(const std::string& m) : Error("argument", m) {}
};

struct ParseError : Error {
    explicit ParseError(const std::string& m) : Error("parse", m) {}
};

struct VocabularyError : Error {
    explicit VocabularyError(const std::string& m) : Error("vocabulary", m) {}
};

struct InfeasibleLabelError : Error {
    explicit InfeasibleLabelError(const std::string& m) : Error("infeasible_label", m) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& m) : Error("config", m) {}
};

struct IoError : Error {
    explicit IoError(const std::string& m) : Error("io", m) {}
};

// Checkpoint failures are split so callers can tell a stale file from a damaged one.
struct CheckpointVersionError : Error {
    explicit CheckpointVersionError(const std::string& m) : Error("checkpoint_version", m) {}
};

struct CheckpointCorruptError : Error {
    explicit CheckpointCorruptError(const std::string& m) : Error("checkpoint_corrupt", m) {}
};

struct CheckpointMismatchError : Error {
    explicit CheckpointMismatchError(const std::string& m) : Error("checkpoint_mismatch", m) {}
};

}  // namespace qocr
