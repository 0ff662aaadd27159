#pragma once

#include <stdexcept>
#include <string>

namespace cjdesign {

// Trace of the pair-difference covariance is zero: every pair has zero prior
// variance, so no scheduling distribution exists.
class DegeneratePriorError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MemoryCapError : public std::runtime_error {
public:
    MemoryCapError(const std::string& what, std::size_t cap)
        : std::runtime_error(what), cap_(cap) {}
    [[nodiscard]] std::size_t cap() const noexcept { return cap_; }

private:
    std::size_t cap_;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SingularPriorError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace cjdesign
