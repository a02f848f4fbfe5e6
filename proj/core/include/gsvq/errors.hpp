#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gsvq {

// File-system level failure: missing file, unreadable path, short write.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed content in a file we could open. Carries a classification and the
// byte offset at which the problem was detected.
class FormatError : public std::runtime_error {
public:
    enum class Kind {
        BadMagic,
        BadVersion,
        BadHeader,
        Truncated,
        IndexRange,
        BadValue,
    };

    FormatError(Kind kind, std::size_t byte_offset, const std::string& what)
        : std::runtime_error(what), kind_(kind), offset_(byte_offset) {}

    Kind kind() const noexcept { return kind_; }
    std::size_t byte_offset() const noexcept { return offset_; }

private:
    Kind kind_;
    std::size_t offset_;
};

// Numeric failure driven by data: non-finite loss, zero quaternion, ...
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace gsvq
