/// \file errors.hpp
/// \brief Error taxonomy for the oscillab library.
///
/// Every failure mode the library can report is a distinct exception type
/// with a stable machine-readable code string, so callers (and the CLI's
/// structured stderr channel) can dispatch without parsing prose.

#pragma once

#include <stdexcept>
#include <string>

namespace oscillab {

/// Base class for all library errors.  `code()` is a stable identifier;
/// `what()` carries a human-readable diagnostic.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& msg)
        : std::runtime_error(code + ": " + msg), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

#define OSCILLAB_DEFINE_ERROR(Name)                                     \
    class Name : public Error {                                         \
    public:                                                             \
        explicit Name(const std::string& msg) : Error(#Name, msg) {}    \
    }

// sl2core
OSCILLAB_DEFINE_ERROR(NotElliptic);
OSCILLAB_DEFINE_ERROR(DegenerateA02);
OSCILLAB_DEFINE_ERROR(ZeroDilation);
// qpfun
OSCILLAB_DEFINE_ERROR(WidthExceeded);
OSCILLAB_DEFINE_ERROR(StepTooLarge);
// metaengine
OSCILLAB_DEFINE_ERROR(TailEscape);
OSCILLAB_DEFINE_ERROR(NormCapExceeded);
// sobolev
OSCILLAB_DEFINE_ERROR(TruncationTail);
OSCILLAB_DEFINE_ERROR(ZeroState);
OSCILLAB_DEFINE_ERROR(NotConverged);
// akbuilder
OSCILLAB_DEFINE_ERROR(SearchExhausted);
OSCILLAB_DEFINE_ERROR(InfeasibleDepth);
OSCILLAB_DEFINE_ERROR(PrecisionExhausted);
OSCILLAB_DEFINE_ERROR(DepthExceeded);
OSCILLAB_DEFINE_ERROR(NormBudgetExceeded);
// kamengine
OSCILLAB_DEFINE_ERROR(SmallDivisorBlowup);
OSCILLAB_DEFINE_ERROR(Stalled);
// cli / config
OSCILLAB_DEFINE_ERROR(UnknownKey);
OSCILLAB_DEFINE_ERROR(TypeMismatch);
OSCILLAB_DEFINE_ERROR(MissingRequired);

#undef OSCILLAB_DEFINE_ERROR

} // namespace oscillab
