#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace kconf {

// Base of every error raised by the library. kind() is the stable,
// machine-readable name reported by the CLI.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define KCONF_DEFINE_ERROR(Name)                                      \
    class Name : public Error {                                       \
    public:                                                           \
        explicit Name(const std::string& what) : Error(#Name, what) {} \
    };

KCONF_DEFINE_ERROR(UnknownIdentifier)
KCONF_DEFINE_ERROR(DomainError)
KCONF_DEFINE_ERROR(NotPeriodic)
KCONF_DEFINE_ERROR(NonHyperbolic)
KCONF_DEFINE_ERROR(GridTooCoarse)
KCONF_DEFINE_ERROR(NoZeros)
KCONF_DEFINE_ERROR(BadEpsSequence)
KCONF_DEFINE_ERROR(BudgetExceeded)
KCONF_DEFINE_ERROR(OutOfRange)
KCONF_DEFINE_ERROR(NotMehidi)
KCONF_DEFINE_ERROR(NoBracket)
KCONF_DEFINE_ERROR(NumericalStall)
KCONF_DEFINE_ERROR(CrossesZero)
KCONF_DEFINE_ERROR(NonSimpleZero)
KCONF_DEFINE_ERROR(InvalidCertificate)
KCONF_DEFINE_ERROR(UnknownGenerator)
KCONF_DEFINE_ERROR(OutOfDomino)
KCONF_DEFINE_ERROR(NotReeb)
KCONF_DEFINE_ERROR(LightlikeGeodesic)
KCONF_DEFINE_ERROR(NotAZero)
KCONF_DEFINE_ERROR(InvalidArgument)
KCONF_DEFINE_ERROR(NotMonotone)

#undef KCONF_DEFINE_ERROR

class SyntaxError : public Error {
public:
    SyntaxError(std::size_t offset, std::vector<std::string> expected, const std::string& detail);

    std::size_t offset() const noexcept { return offset_; }
    const std::vector<std::string>& expected() const noexcept { return expected_; }

private:
    std::size_t offset_;
    std::vector<std::string> expected_;
};

}  // namespace kconf
