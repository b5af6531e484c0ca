#pragma once

#include <stdexcept>
#include <string>

namespace pia {

/// Broad failure classes; the CLI maps them onto exit codes.
enum class ErrorCategory { Config, Unsupported, ResourceCap, Numeric, Internal };

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

#define PIA_DEFINE_ERROR(Name, Category)                                    \
    class Name : public Error {                                             \
    public:                                                                 \
        explicit Name(const std::string& what) : Error(Category, what) {}   \
    }

// model-core
PIA_DEFINE_ERROR(StateCapExceeded, ErrorCategory::ResourceCap);
PIA_DEFINE_ERROR(InvalidDistribution, ErrorCategory::Internal);
PIA_DEFINE_ERROR(IllegalAction, ErrorCategory::Internal);
PIA_DEFINE_ERROR(ParseError, ErrorCategory::Config);
PIA_DEFINE_ERROR(ValidationError, ErrorCategory::Config);
PIA_DEFINE_ERROR(ConfigError, ErrorCategory::Config);

// pctl
PIA_DEFINE_ERROR(SyntaxError, ErrorCategory::Config);
PIA_DEFINE_ERROR(UnsupportedFragment, ErrorCategory::Unsupported);
PIA_DEFINE_ERROR(NonConvergence, ErrorCategory::Numeric);

// policy
PIA_DEFINE_ERROR(ShapeMismatch, ErrorCategory::Config);
PIA_DEFINE_ERROR(FormatError, ErrorCategory::Config);
PIA_DEFINE_ERROR(SchemaMismatch, ErrorCategory::Config);
PIA_DEFINE_ERROR(DivergenceDetected, ErrorCategory::Numeric);

// robustness
PIA_DEFINE_ERROR(AttackSetCapExceeded, ErrorCategory::ResourceCap);
PIA_DEFINE_ERROR(MismatchAgainstPStar, ErrorCategory::Internal);

#undef PIA_DEFINE_ERROR

}  // namespace pia
