#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mpr {

/// Closed error taxonomy. Every throwing path in the library uses one of
/// these codes; the CLI maps each code to exactly one exit code.
enum class Errc {
    InvalidParams,             // parameter validation failed (exit 2)
    HorizonBeyondCriticalTime, // tangent regime with T >= T*   (exit 3)
    QNonPositive,              // Q(t) <= 0, upstream solver failure (exit 3)
    DivergentExpectation,      // Gaussian quadratic expectation does not exist (exit 3)
    NotVerified,               // gamma < 1 and the sufficient admissibility condition failed (exit 3)
    UnclassifiedRegime,        // boundary case rho = rho*, gamma <= gamma* (exit 3)
    NonPositivePrice,          // price path with a non-positive entry (exit 3)
    SolutionBlowUp,            // ODE solution diverged before the horizon (exit 4)
    MomentExplosion,           // MGF does not exist for the requested exponent (exit 4)
    GridTooCoarse,             // Fourier tail or clipping mass above tolerance (exit 4)
};

const char* errc_name(Errc code);

/// Exit code contract: 0 ok, 2 config, 3 math-domain, 4 numerical-convergence.
int errc_exit_code(Errc code);

class Error : public std::runtime_error {
  public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    Errc code() const { return code_; }

  private:
    Errc code_;
};

/// One violated parameter constraint; validation collects all of them.
struct ParamIssue {
    enum class Kind {
        NegativeVolatility,
        CorrelationOutOfRange,
        NonPositiveHorizon,
        NonPositiveGamma,
        GammaTooCloseToOne,
        NonPositiveMeanReversion,
        NegativeLongRunMean,
        NegativePriorVariance,
        NonPositiveWealth,
        NonFinite,
    };
    Kind kind;
    std::string message;
};

const char* param_issue_name(ParamIssue::Kind kind);

class ValidationError : public Error {
  public:
    explicit ValidationError(std::vector<ParamIssue> issues);

    const std::vector<ParamIssue>& issues() const { return issues_; }

  private:
    std::vector<ParamIssue> issues_;
};

} // namespace mpr
