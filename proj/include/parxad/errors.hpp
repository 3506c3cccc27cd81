#pragma once

#include <stdexcept>
#include <string>

namespace parxad {

/// Bad argument values: non-finite inputs, mismatched sizes, malformed lines.
class InvalidInputError : public std::runtime_error {
public:
    explicit InvalidInputError(const std::string& what) : std::runtime_error(what) {}
};

/// Not enough usable rows/samples to fit or summarize. Carries the count seen.
class InsufficientDataError : public std::runtime_error {
public:
    InsufficientDataError(const std::string& what, long long rows_seen)
        : std::runtime_error(what), rows(rows_seen) {}
    long long rows;
};

/// Filesystem / stream failures.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Serving-store protocol violations (stale version, torn file, empty store).
class StoreError : public std::runtime_error {
public:
    explicit StoreError(const std::string& what) : std::runtime_error(what) {}
};

class EmptyStoreError : public StoreError {
public:
    explicit EmptyStoreError(const std::string& what) : StoreError(what) {}
};

} // namespace parxad
