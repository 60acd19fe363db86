#include "mpr/errors.hpp"

#include <sstream>

namespace mpr {

const char* errc_name(Errc code) {
    switch (code) {
        case Errc::InvalidParams: return "InvalidParams";
        case Errc::HorizonBeyondCriticalTime: return "HorizonBeyondCriticalTime";
        case Errc::QNonPositive: return "QNonPositive";
        case Errc::DivergentExpectation: return "DivergentExpectation";
        case Errc::NotVerified: return "NotVerified";
        case Errc::UnclassifiedRegime: return "UnclassifiedRegime";
        case Errc::NonPositivePrice: return "NonPositivePrice";
        case Errc::SolutionBlowUp: return "SolutionBlowUp";
        case Errc::MomentExplosion: return "MomentExplosion";
        case Errc::GridTooCoarse: return "GridTooCoarse";
    }
    return "UnknownError";
}

int errc_exit_code(Errc code) {
    switch (code) {
        case Errc::InvalidParams:
            return 2;
        case Errc::HorizonBeyondCriticalTime:
        case Errc::QNonPositive:
        case Errc::DivergentExpectation:
        case Errc::NotVerified:
        case Errc::UnclassifiedRegime:
        case Errc::NonPositivePrice:
            return 3;
        case Errc::SolutionBlowUp:
        case Errc::MomentExplosion:
        case Errc::GridTooCoarse:
            return 4;
    }
    return 1;
}

const char* param_issue_name(ParamIssue::Kind kind) {
    using K = ParamIssue::Kind;
    switch (kind) {
        case K::NegativeVolatility: return "NegativeVolatility";
        case K::CorrelationOutOfRange: return "CorrelationOutOfRange";
        case K::NonPositiveHorizon: return "NonPositiveHorizon";
        case K::NonPositiveGamma: return "NonPositiveGamma";
        case K::GammaTooCloseToOne: return "GammaTooCloseToOne";
        case K::NonPositiveMeanReversion: return "NonPositiveMeanReversion";
        case K::NegativeLongRunMean: return "NegativeLongRunMean";
        case K::NegativePriorVariance: return "NegativePriorVariance";
        case K::NonPositiveWealth: return "NonPositiveWealth";
        case K::NonFinite: return "NonFinite";
    }
    return "UnknownIssue";
}

namespace {

std::string join_issues(const std::vector<ParamIssue>& issues) {
    std::ostringstream out;
    out << "invalid parameters (" << issues.size() << " violation"
        << (issues.size() == 1 ? "" : "s") << "):";
    for (const auto& issue : issues) {
        out << " [" << param_issue_name(issue.kind) << "] " << issue.message << ";";
    }
    return out.str();
}

} // namespace

ValidationError::ValidationError(std::vector<ParamIssue> issues)
    : Error(Errc::InvalidParams, join_issues(issues)), issues_(std::move(issues)) {}

} // namespace mpr
