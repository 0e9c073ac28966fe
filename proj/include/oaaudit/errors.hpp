#ifndef OAAUDIT_ERRORS_HPP
#define OAAUDIT_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace oa {

/// Fatal error categories, in exit-code order. A process run that aborts maps
/// the first fatal error to its category's exit code; success is 0.
enum class ErrorCategory {
    Config = 2,
    Harvest = 3,
    Integrity = 4,
    Io = 5,
};

class AuditError : public std::runtime_error {
public:
    AuditError(ErrorCategory category, const std::string& message)
        : std::runtime_error(message), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }
    int exit_code() const noexcept { return static_cast<int>(category_); }

private:
    ErrorCategory category_;
};

/// Bad or inconsistent configuration: unknown acronym, missing file reference,
/// malformed query expression, invalid year window, unparsable input record
/// stream.
class ConfigError : public AuditError {
public:
    explicit ConfigError(const std::string& message)
        : AuditError(ErrorCategory::Config, message) {}
};

/// Parse failure in a query expression. Carries the byte offset of the first
/// offending character in the source text.
class QueryParseError : public ConfigError {
public:
    QueryParseError(const std::string& message, std::size_t offset)
        : ConfigError(message + " (offset " + std::to_string(offset) + ")"),
          offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Harvest failure that exhausted its retry budget, or a response that cannot
/// be advanced past (unknown pagination state).
class HarvestError : public AuditError {
public:
    explicit HarvestError(const std::string& message)
        : AuditError(ErrorCategory::Harvest, message) {}
};

/// Internal consistency violation: a computed partition that does not add up,
/// duplicate uids where uniqueness is guaranteed, or a stage input that fails
/// its declared contract.
class IntegrityError : public AuditError {
public:
    explicit IntegrityError(const std::string& message)
        : AuditError(ErrorCategory::Integrity, message) {}
};

class IoError : public AuditError {
public:
    explicit IoError(const std::string& message)
        : AuditError(ErrorCategory::Io, message) {}
};

} // namespace oa

#endif
