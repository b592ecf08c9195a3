#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ftg {

// Document-level failure while reading an API spec. Carries the 1-based
// line/column of the offending byte when the underlying parser knows it.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string message, std::size_t line, std::size_t column)
        : std::runtime_error(std::move(message)), line_(line), column_(column) {}

    explicit ParseError(std::string message)
        : std::runtime_error(std::move(message)), line_(0), column_(0) {}

    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

class DuplicateIdError : public std::runtime_error {
public:
    explicit DuplicateIdError(const std::string& id)
        : std::runtime_error("duplicate function id: " + id), id_(id) {}

    const std::string& id() const { return id_; }

private:
    std::string id_;
};

// BFS frontier grew past the configured cap. `level` is the sequence length
// being expanded when the cap was hit.
class FrontierExplosionError : public std::runtime_error {
public:
    FrontierExplosionError(std::size_t level, std::size_t frontier_size, std::size_t cap)
        : std::runtime_error("frontier exploded at level " + std::to_string(level) + ": " +
                             std::to_string(frontier_size) + " sequences exceed cap " +
                             std::to_string(cap)),
          level_(level) {}

    std::size_t level() const { return level_; }

private:
    std::size_t level_;
};

// A sequence passed validation but could not be bound during planning.
// This is an internal invariant violation, never a user error.
class InternalBindingError : public std::logic_error {
public:
    explicit InternalBindingError(const std::string& what) : std::logic_error(what) {}
};

// The renderer has no decoder template for a primitive kind.
class UnsupportedPrimitiveError : public std::runtime_error {
public:
    explicit UnsupportedPrimitiveError(const std::string& kind_name)
        : std::runtime_error("no decoder template for primitive kind: " + kind_name) {}
};

class ManifestError : public std::runtime_error {
public:
    explicit ManifestError(const std::string& what) : std::runtime_error(what) {}
};

// Screening cannot run: no built targets found or the toolchain is missing.
class ScreenSetupError : public std::runtime_error {
public:
    explicit ScreenSetupError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ftg
