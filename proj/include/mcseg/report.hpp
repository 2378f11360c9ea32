#pragma once

// CaseReport and CorrelationResult serialization. CSV is the interchange
// format between the analyze, correlate and flag stages; the headers below
// are part of the documented contract. Doubles are written in shortest
// round-trip form so values survive a write/read cycle bit-exactly.

#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mcseg/format.hpp"
#include "mcseg/stats.hpp"
#include "mcseg/uncertainty.hpp"

namespace mcseg {

class ReportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr const char* kReportCsvHeader =
    "case_id,n_samples,cv,d_pw,u_labelled,consensus_voxels,dice";
inline constexpr const char* kCorrelationCsvHeader = "measure,rho,p_value,n,dropped";

namespace detail {

inline std::string optional_field(const std::optional<double>& v) {
    return v.has_value() ? format_double(*v) : std::string();
}

inline std::optional<double> parse_optional_field(const std::string& field, const char* what) {
    if (field.empty()) return std::nullopt;
    return parse_double(field, what);
}

}  // namespace detail

inline std::string to_csv_row(const CaseReport& r) {
    std::string row = r.case_id;
    row += ',';
    row += std::to_string(r.n_samples);
    row += ',';
    row += detail::format_double(r.cv);
    row += ',';
    row += detail::format_double(r.d_pw);
    row += ',';
    row += detail::optional_field(r.u_labelled);
    row += ',';
    row += std::to_string(r.consensus_voxels);
    row += ',';
    row += detail::optional_field(r.dice_vs_gt);
    return row;
}

inline std::string reports_to_csv(const std::vector<CaseReport>& reports) {
    std::string out = kReportCsvHeader;
    out += '\n';
    for (const CaseReport& r : reports) {
        out += to_csv_row(r);
        out += '\n';
    }
    return out;
}

inline std::vector<CaseReport> parse_reports_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ReportError("report CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kReportCsvHeader)
        throw ReportError("report CSV header mismatch: expected '" +
                          std::string(kReportCsvHeader) + "', got '" + line + "'");
    std::vector<CaseReport> reports;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != 7)
            throw ReportError("report CSV line " + std::to_string(line_no) + ": expected 7 fields, got " +
                              std::to_string(fields.size()));
        CaseReport r;
        r.case_id = fields[0];
        if (r.case_id.empty())
            throw ReportError("report CSV line " + std::to_string(line_no) + ": empty case_id");
        try {
            r.n_samples = static_cast<int>(detail::parse_int(fields[1], "n_samples"));
            r.cv = detail::parse_double(fields[2], "cv");
            r.d_pw = detail::parse_double(fields[3], "d_pw");
            r.u_labelled = detail::parse_optional_field(fields[4], "u_labelled");
            r.consensus_voxels =
                static_cast<std::size_t>(detail::parse_int(fields[5], "consensus_voxels"));
            r.dice_vs_gt = detail::parse_optional_field(fields[6], "dice");
        } catch (const std::exception& e) {
            throw ReportError("report CSV line " + std::to_string(line_no) + ": " + e.what());
        }
        reports.push_back(std::move(r));
    }
    return reports;
}

/// Structured per-case record.
inline nlohmann::json report_to_json(const CaseReport& r) {
    nlohmann::json j;
    j["case_id"] = r.case_id;
    j["n_samples"] = r.n_samples;
    j["threshold"] = r.threshold;
    j["cv"] = r.cv;
    j["d_pw"] = r.d_pw;
    if (r.u_labelled.has_value())
        j["u_labelled"] = *r.u_labelled;
    else
        j["u_labelled"] = nullptr;
    j["consensus_voxels"] = r.consensus_voxels;
    if (r.dice_vs_gt.has_value())
        j["dice"] = *r.dice_vs_gt;
    else
        j["dice"] = nullptr;
    return j;
}

inline CaseReport report_from_json(const nlohmann::json& j) {
    CaseReport r;
    r.case_id = j.at("case_id").get<std::string>();
    r.n_samples = j.at("n_samples").get<int>();
    if (j.contains("threshold")) r.threshold = j.at("threshold").get<double>();
    r.cv = j.at("cv").get<double>();
    r.d_pw = j.at("d_pw").get<double>();
    if (!j.at("u_labelled").is_null()) r.u_labelled = j.at("u_labelled").get<double>();
    r.consensus_voxels = j.at("consensus_voxels").get<std::size_t>();
    if (!j.at("dice").is_null()) r.dice_vs_gt = j.at("dice").get<double>();
    return r;
}

inline std::string correlations_to_csv(const std::vector<CorrelationResult>& rows) {
    std::string out = kCorrelationCsvHeader;
    out += '\n';
    for (const CorrelationResult& r : rows) {
        out += r.measure;
        out += ',';
        out += detail::format_double(r.rho);
        out += ',';
        out += detail::format_double(r.p_value);
        out += ',';
        out += std::to_string(r.n);
        out += ',';
        out += std::to_string(r.dropped);
        out += '\n';
    }
    return out;
}

inline std::vector<CorrelationResult> parse_correlations_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ReportError("correlation CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCorrelationCsvHeader)
        throw ReportError("correlation CSV header mismatch: expected '" +
                          std::string(kCorrelationCsvHeader) + "', got '" + line + "'");
    std::vector<CorrelationResult> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != 5)
            throw ReportError("correlation CSV line " + std::to_string(line_no) +
                              ": expected 5 fields, got " + std::to_string(fields.size()));
        CorrelationResult r;
        r.measure = fields[0];
        r.quality = "dice";
        try {
            r.rho = detail::parse_double(fields[1], "rho");
            r.p_value = detail::parse_double(fields[2], "p_value");
            r.n = static_cast<std::size_t>(detail::parse_int(fields[3], "n"));
            r.dropped = static_cast<std::size_t>(detail::parse_int(fields[4], "dropped"));
        } catch (const std::exception& e) {
            throw ReportError("correlation CSV line " + std::to_string(line_no) + ": " + e.what());
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace mcseg
