#include "mcseg/report.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

using namespace mcseg;

namespace {

CaseReport sample_report() {
    CaseReport r;
    r.case_id = "case_007";
    r.n_samples = 5;
    r.threshold = 0.5;
    r.cv = 0.5;
    r.d_pw = 0.25;
    r.u_labelled = 0.125;
    r.consensus_voxels = 42;
    r.dice_vs_gt = 0.75;
    return r;
}

TEST(FormatDouble, ShortestFormRoundTrips) {
    for (double v : {1.0 / 3.0, 0.1, 1e-17, 1234.5678, -0.0, 2e300}) {
        const std::string s = detail::format_double(v);
        EXPECT_EQ(detail::parse_double(s), v) << s;
    }
    EXPECT_EQ(detail::format_double(0.5), "0.5");
    EXPECT_EQ(detail::format_double(42.0), "42");
}

TEST(FormatDouble, ParsersRejectGarbage) {
    EXPECT_THROW(detail::parse_double("1.2.3"), std::runtime_error);
    EXPECT_THROW(detail::parse_double(""), std::runtime_error);
    EXPECT_THROW(detail::parse_double("abc"), std::runtime_error);
    EXPECT_THROW(detail::parse_double("1.0 "), std::runtime_error);
    EXPECT_THROW(detail::parse_int("1.5"), std::runtime_error);
    EXPECT_THROW(detail::parse_int("x"), std::runtime_error);
    EXPECT_EQ(detail::parse_int("-12"), -12);
}

TEST(SplitCsvLine, HandlesEmptyFields) {
    const auto fields = detail::split_csv_line("a,,c");
    ASSERT_EQ(fields.size(), 3u);
    EXPECT_EQ(fields[0], "a");
    EXPECT_EQ(fields[1], "");
    EXPECT_EQ(fields[2], "c");
    EXPECT_EQ(detail::split_csv_line("abc").size(), 1u);
    EXPECT_EQ(detail::split_csv_line("a,b,").size(), 3u);
}

TEST(ReportCsv, HeaderContract) {
    EXPECT_STREQ(kReportCsvHeader, "case_id,n_samples,cv,d_pw,u_labelled,consensus_voxels,dice");
    EXPECT_STREQ(kCorrelationCsvHeader, "measure,rho,p_value,n,dropped");
}

TEST(ReportCsv, RowWithAllFields) {
    EXPECT_EQ(to_csv_row(sample_report()), "case_007,5,0.5,0.25,0.125,42,0.75");
}

TEST(ReportCsv, UndefinedFieldsAreEmpty) {
    CaseReport r = sample_report();
    r.u_labelled.reset();
    r.dice_vs_gt.reset();
    EXPECT_EQ(to_csv_row(r), "case_007,5,0.5,0.25,,42,");

    const auto parsed = parse_reports_csv(reports_to_csv({r}));
    ASSERT_EQ(parsed.size(), 1u);
    EXPECT_FALSE(parsed[0].u_labelled.has_value());
    EXPECT_FALSE(parsed[0].dice_vs_gt.has_value());
}

TEST(ReportCsv, RoundTripIsBitExact) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> value(0.0, 1.0);
    std::vector<CaseReport> reports;
    for (int i = 0; i < 50; ++i) {
        CaseReport r;
        r.case_id = "case_" + std::to_string(i);
        r.n_samples = 2 + i % 9;
        r.cv = value(rng) / 3.0;
        r.d_pw = value(rng);
        if (i % 4) r.u_labelled = value(rng) * 0.7;
        r.consensus_voxels = static_cast<std::size_t>(i) * 997;
        if (i % 3) r.dice_vs_gt = value(rng);
        reports.push_back(std::move(r));
    }
    const auto parsed = parse_reports_csv(reports_to_csv(reports));
    ASSERT_EQ(parsed.size(), reports.size());
    for (std::size_t i = 0; i < reports.size(); ++i) {
        EXPECT_EQ(parsed[i].case_id, reports[i].case_id);
        EXPECT_EQ(parsed[i].n_samples, reports[i].n_samples);
        EXPECT_EQ(parsed[i].cv, reports[i].cv);
        EXPECT_EQ(parsed[i].d_pw, reports[i].d_pw);
        EXPECT_EQ(parsed[i].u_labelled, reports[i].u_labelled);
        EXPECT_EQ(parsed[i].consensus_voxels, reports[i].consensus_voxels);
        EXPECT_EQ(parsed[i].dice_vs_gt, reports[i].dice_vs_gt);
    }
}

TEST(ReportCsv, ParserRejectsMalformedInput) {
    EXPECT_THROW(parse_reports_csv(""), ReportError);
    EXPECT_THROW(parse_reports_csv("wrong,header\n"), ReportError);
    const std::string header(kReportCsvHeader);
    EXPECT_THROW(parse_reports_csv(header + "\nc,5,0.5,0.25,0.1,42\n"), ReportError);
    EXPECT_THROW(parse_reports_csv(header + "\nc,5,abc,0.25,0.1,42,0.75\n"), ReportError);
    EXPECT_THROW(parse_reports_csv(header + "\n,5,0.5,0.25,0.1,42,0.75\n"), ReportError);
}

TEST(ReportCsv, ToleratesCrlfAndBlankLines) {
    const std::string text = std::string(kReportCsvHeader) +
                             "\r\nc,5,0.5,0.25,0.1,42,0.75\r\n\r\n";
    const auto parsed = parse_reports_csv(text);
    ASSERT_EQ(parsed.size(), 1u);
    EXPECT_EQ(parsed[0].case_id, "c");
    EXPECT_EQ(parsed[0].dice_vs_gt, 0.75);
}

TEST(ReportJson, RoundTripsWithNulls) {
    CaseReport r = sample_report();
    r.threshold = 0.4;
    r.u_labelled.reset();
    const nlohmann::json j = report_to_json(r);
    EXPECT_TRUE(j.at("u_labelled").is_null());
    EXPECT_EQ(j.at("dice").get<double>(), 0.75);
    const CaseReport back = report_from_json(j);
    EXPECT_EQ(back.case_id, r.case_id);
    EXPECT_EQ(back.n_samples, r.n_samples);
    EXPECT_EQ(back.threshold, 0.4);
    EXPECT_EQ(back.cv, r.cv);
    EXPECT_EQ(back.d_pw, r.d_pw);
    EXPECT_EQ(back.u_labelled, r.u_labelled);
    EXPECT_EQ(back.consensus_voxels, r.consensus_voxels);
    EXPECT_EQ(back.dice_vs_gt, r.dice_vs_gt);
}

TEST(CorrelationCsv, RowFormatAndRoundTrip) {
    CorrelationResult r;
    r.measure = "d_pw";
    r.quality = "dice";
    r.rho = 0.5;
    r.p_value = 0.0078125;
    r.n = 55;
    r.dropped = 2;
    EXPECT_EQ(correlations_to_csv({r}),
              std::string(kCorrelationCsvHeader) + "\nd_pw,0.5,0.0078125,55,2\n");

    const auto parsed = parse_correlations_csv(correlations_to_csv({r}));
    ASSERT_EQ(parsed.size(), 1u);
    EXPECT_EQ(parsed[0].measure, "d_pw");
    EXPECT_EQ(parsed[0].quality, "dice");
    EXPECT_EQ(parsed[0].rho, 0.5);
    EXPECT_EQ(parsed[0].p_value, 0.0078125);
    EXPECT_EQ(parsed[0].n, 55u);
    EXPECT_EQ(parsed[0].dropped, 2u);
}

TEST(CorrelationCsv, ParserRejectsMalformedInput) {
    EXPECT_THROW(parse_correlations_csv("nope\n"), ReportError);
    const std::string header(kCorrelationCsvHeader);
    EXPECT_THROW(parse_correlations_csv(header + "\ncv,0.5,0.01,55\n"), ReportError);
    EXPECT_THROW(parse_correlations_csv(header + "\ncv,?,0.01,55,0\n"), ReportError);
}

}  // namespace
