#pragma once

// Low-confidence case flagging. A policy is a set of per-measure threshold
// rules combined with any/all; cases whose u_labelled is undefined are
// always flagged ("undefined-measure"), never silently dropped.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mcseg/format.hpp"
#include "mcseg/uncertainty.hpp"

namespace mcseg {

class PolicyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class FlagComparator { above, below };
enum class FlagMode { any, all };

struct FlagRule {
    std::string measure;  // cv | d_pw | u_labelled
    FlagComparator comparator = FlagComparator::above;
    double cutoff = 0.0;

    std::string describe() const {
        return measure + (comparator == FlagComparator::above ? " above " : " below ") +
               detail::format_double(cutoff);
    }
};

struct FlagPolicy {
    std::vector<FlagRule> rules;
    FlagMode mode = FlagMode::any;
};

struct FlagResult {
    std::string case_id;
    bool flagged = false;
    std::vector<std::string> reasons;
};

inline void validate(const FlagPolicy& policy, std::vector<std::string>* warnings = nullptr) {
    if (policy.rules.empty()) throw PolicyError("policy must contain at least one rule");
    for (const FlagRule& r : policy.rules) {
        if (r.measure != "cv" && r.measure != "d_pw" && r.measure != "u_labelled")
            throw PolicyError("unknown measure '" + r.measure + "' (cv|d_pw|u_labelled)");
        if (!std::isfinite(r.cutoff)) throw PolicyError("rule cutoff must be finite");
        // d_pw drops when quality drops; cv and u_labelled rise
        const FlagComparator expected =
            r.measure == "d_pw" ? FlagComparator::below : FlagComparator::above;
        if (warnings && r.comparator != expected)
            warnings->push_back("rule '" + r.describe() + "' flags the " +
                                (r.comparator == FlagComparator::above ? "high" : "low") +
                                " side; " + r.measure + " usually flags the other side");
    }
}

inline FlagPolicy parse_policy(const nlohmann::json& j) {
    if (!j.is_object()) throw PolicyError("policy must be a JSON object");
    FlagPolicy policy;
    for (const auto& [key, value] : j.items()) {
        if (key == "mode") {
            const std::string m = value.get<std::string>();
            if (m == "any")
                policy.mode = FlagMode::any;
            else if (m == "all")
                policy.mode = FlagMode::all;
            else
                throw PolicyError("mode must be 'any' or 'all', got '" + m + "'");
        } else if (key == "rules") {
            if (!value.is_array()) throw PolicyError("rules must be an array");
            for (const auto& jr : value) {
                FlagRule rule;
                for (const auto& [rk, rv] : jr.items()) {
                    if (rk == "measure")
                        rule.measure = rv.get<std::string>();
                    else if (rk == "comparator") {
                        const std::string c = rv.get<std::string>();
                        if (c == "above")
                            rule.comparator = FlagComparator::above;
                        else if (c == "below")
                            rule.comparator = FlagComparator::below;
                        else
                            throw PolicyError("comparator must be 'above' or 'below', got '" + c +
                                              "'");
                    } else if (rk == "cutoff") {
                        if (!rv.is_number()) throw PolicyError("cutoff must be a number");
                        rule.cutoff = rv.get<double>();
                    } else {
                        throw PolicyError("unknown rule key '" + rk + "'");
                    }
                }
                if (rule.measure.empty()) throw PolicyError("rule is missing 'measure'");
                if (!jr.contains("cutoff")) throw PolicyError("rule is missing 'cutoff'");
                policy.rules.push_back(std::move(rule));
            }
        } else {
            throw PolicyError("unknown policy key '" + key + "'");
        }
    }
    validate(policy);
    return policy;
}

namespace detail {

inline std::optional<double> measure_value(const CaseReport& r, const std::string& measure) {
    if (measure == "cv") return r.cv;
    if (measure == "d_pw") return r.d_pw;
    return r.u_labelled;
}

}  // namespace detail

inline FlagResult evaluate_flags(const FlagPolicy& policy, const CaseReport& report) {
    FlagResult result;
    result.case_id = report.case_id;
    if (!report.u_labelled.has_value()) {
        result.flagged = true;
        result.reasons.push_back("undefined-measure");
        return result;
    }
    std::size_t triggered = 0;
    for (const FlagRule& rule : policy.rules) {
        const auto value = detail::measure_value(report, rule.measure);
        const bool hit = rule.comparator == FlagComparator::above ? *value > rule.cutoff
                                                                  : *value < rule.cutoff;
        if (hit) {
            ++triggered;
            result.reasons.push_back(rule.describe());
        }
    }
    result.flagged = policy.mode == FlagMode::any ? triggered > 0
                                                  : triggered == policy.rules.size();
    if (!result.flagged) result.reasons.clear();
    return result;
}

inline std::vector<FlagResult> evaluate_flags(const FlagPolicy& policy,
                                              const std::vector<CaseReport>& reports) {
    std::vector<FlagResult> out;
    out.reserve(reports.size());
    for (const CaseReport& r : reports) out.push_back(evaluate_flags(policy, r));
    return out;
}

inline constexpr const char* kFlagCsvHeader = "case_id,reasons";

/// Only flagged cases are listed; reasons are ';'-joined.
inline std::string flags_to_csv(const std::vector<FlagResult>& results) {
    std::string out = kFlagCsvHeader;
    out += '\n';
    for (const FlagResult& r : results) {
        if (!r.flagged) continue;
        out += r.case_id;
        out += ',';
        for (std::size_t i = 0; i < r.reasons.size(); ++i) {
            if (i) out += ';';
            out += r.reasons[i];
        }
        out += '\n';
    }
    return out;
}

}  // namespace mcseg
