#include "mcseg/uncertainty.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "oracle.hpp"
#include "test_util.hpp"

using namespace mcseg;

namespace {

VoxelGrid constant_grid(const Dims3& dims, float v) {
    return VoxelGrid::filled(dims, Spacing3{}, v);
}

// n samples, sample i having its first counts[i] voxels at 1.0
SampleSet prefix_sets(const std::vector<std::size_t>& counts, std::size_t voxels) {
    std::vector<VoxelGrid> samples;
    for (std::size_t c : counts) {
        std::vector<float> values(voxels, 0.0f);
        std::fill(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(c), 1.0f);
        samples.emplace_back(Dims3{static_cast<index_t>(voxels), 1, 1}, Spacing3{},
                             std::move(values));
    }
    return SampleSet("prefix", std::move(samples));
}

TEST(MeanProbability, WorkedExample) {
    // three constant volumes 0.2, 0.4, 0.9 -> mean 0.5
    SampleSet set("c", {constant_grid(Dims3{2, 2, 2}, 0.2f), constant_grid(Dims3{2, 2, 2}, 0.4f),
                        constant_grid(Dims3{2, 2, 2}, 0.9f)});
    const auto mean = mean_probability(set);
    for (double v : mean.data()) EXPECT_NEAR(v, 0.5, 1e-7);
}

TEST(ConsensusMask, HalfAndHalfVoxelIsForeground) {
    // 10 samples, 5 say 1.0 and 5 say 0.0 -> mean exactly 0.5 -> true
    std::vector<VoxelGrid> samples;
    for (int i = 0; i < 10; ++i)
        samples.push_back(constant_grid(Dims3{1, 1, 1}, i < 5 ? 1.0f : 0.0f));
    SampleSet set("c", std::move(samples));
    EXPECT_EQ(consensus_mask(set, 0.5).foreground_count(), 1u);
    EXPECT_EQ(consensus_mask(set, 0.51).foreground_count(), 0u);
}

TEST(UncertaintyMapTest, ConstantHalfIsHalfLogTwo) {
    std::vector<VoxelGrid> samples(4, constant_grid(Dims3{3, 3, 3}, 0.5f));
    SampleSet set("c", std::move(samples));
    const UncertaintyMap map = uncertainty_map(set);
    EXPECT_EQ(map.n_samples, 4);
    for (double v : map.grid.data()) EXPECT_NEAR(v, 0.5 * std::log(2.0), 1e-12);
    const UncertaintyMap bin = uncertainty_map(set, EntropyVariant::binary);
    for (double v : bin.grid.data()) EXPECT_NEAR(v, std::log(2.0), 1e-12);
}

TEST(UncertaintyMapTest, BinarySamplesGiveExactZero) {
    // 0 ln 0 = 0 and 1 ln 1 = 0: certain voxels carry no entropy
    std::mt19937_64 rng(17);
    std::vector<VoxelGrid> samples;
    for (int i = 0; i < 5; ++i) samples.push_back(testutil::random_mask(rng, Dims3{4, 4, 4}).as_grid());
    SampleSet set("c", std::move(samples));
    const UncertaintyMap natural = uncertainty_map(set);
    for (double v : natural.grid.data()) ASSERT_EQ(v, 0.0);
    const UncertaintyMap binary = uncertainty_map(set, EntropyVariant::binary);
    for (double v : binary.grid.data()) ASSERT_EQ(v, 0.0);
}

TEST(UncertaintyMapTest, ValuesAreFiniteAndNonNegative) {
    std::mt19937_64 rng(18);
    const SampleSet set = testutil::random_sample_set(rng, "c", Dims3{6, 5, 4}, 7);
    const UncertaintyMap umap = uncertainty_map(set);
    for (double v : umap.grid.data()) {
        ASSERT_TRUE(std::isfinite(v));
        ASSERT_GE(v, 0.0);
    }
}

TEST(CoefficientOfVariation, WorkedExample) {
    // foreground volumes {90, 100, 110}: Var = 200/3, mean+1 = 101
    SampleSet set = prefix_sets({90, 100, 110}, 128);
    EXPECT_NEAR(coefficient_of_variation(set), (200.0 / 3.0) / 101.0, 1e-12);
    EXPECT_NEAR(coefficient_of_variation(set, 0.5, CvVariant::std_over_mean),
                std::sqrt(200.0 / 3.0) / 101.0, 1e-12);
}

TEST(CoefficientOfVariation, ZeroForIdenticalAndEmptySamples) {
    SampleSet same = prefix_sets({40, 40, 40, 40}, 64);
    EXPECT_EQ(coefficient_of_variation(same), 0.0);
    SampleSet empty = prefix_sets({0, 0}, 64);
    EXPECT_EQ(coefficient_of_variation(empty), 0.0);
}

TEST(MeanPairwiseDice, WorkedExamples) {
    // N=2: |a|=4, |b|=4, overlap 2 -> 0.5
    std::vector<float> a(16, 0.0f), b(16, 0.0f);
    for (int i = 0; i < 4; ++i) a[static_cast<std::size_t>(i)] = 1.0f;
    for (int i = 2; i < 6; ++i) b[static_cast<std::size_t>(i)] = 1.0f;
    SampleSet pair("c", {VoxelGrid(Dims3{16, 1, 1}, Spacing3{}, a),
                         VoxelGrid(Dims3{16, 1, 1}, Spacing3{}, b)});
    EXPECT_EQ(mean_pairwise_dice(pair), 0.5);

    // N=3: A, A, C disjoint, all size 4 -> (1 + 0 + 0)/3
    std::vector<float> c(16, 0.0f);
    for (int i = 8; i < 12; ++i) c[static_cast<std::size_t>(i)] = 1.0f;
    SampleSet triple("c", {VoxelGrid(Dims3{16, 1, 1}, Spacing3{}, a),
                           VoxelGrid(Dims3{16, 1, 1}, Spacing3{}, a),
                           VoxelGrid(Dims3{16, 1, 1}, Spacing3{}, c)});
    EXPECT_EQ(mean_pairwise_dice(triple), 1.0 / 3.0);
}

TEST(MeanPairwiseDice, IdenticalSamplesGiveExactlyOne) {
    std::mt19937_64 rng(23);
    const VoxelGrid grid = testutil::random_mask(rng, Dims3{5, 5, 5}, 0.4).as_grid();
    SampleSet set("c", std::vector<VoxelGrid>(6, grid));
    EXPECT_EQ(mean_pairwise_dice(set), 1.0);
}

TEST(MeanLabelledUncertainty, WorkedExample) {
    // two identical samples with voxels {0.9, 0.6, 0.2}: consensus keeps the
    // first two, U(x) = -p ln p there, mean ~ 0.2006599
    VoxelGrid sample(Dims3{3, 1, 1}, Spacing3{}, {0.9f, 0.6f, 0.2f});
    SampleSet set("c", {sample, sample});
    const auto u = mean_labelled_uncertainty(set);
    ASSERT_TRUE(u.has_value());
    const double p1 = static_cast<double>(0.9f);
    const double p2 = static_cast<double>(0.6f);
    const double expected = (-p1 * std::log(p1) - p2 * std::log(p2)) / 2.0;
    EXPECT_NEAR(*u, expected, 1e-15);
    EXPECT_NEAR(*u, 0.2006599, 1e-6);
}

TEST(MeanLabelledUncertainty, UndefinedOnEmptyConsensus) {
    SampleSet set("c", {constant_grid(Dims3{2, 2, 2}, 0.0f), constant_grid(Dims3{2, 2, 2}, 0.1f)});
    EXPECT_FALSE(mean_labelled_uncertainty(set).has_value());
}

TEST(Measures, InvariantUnderSamplePermutation) {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 5; ++trial) {
        const SampleSet set = testutil::random_sample_set(rng, "c", Dims3{5, 4, 3}, 6);
        std::vector<VoxelGrid> shuffled(set.samples());
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        const SampleSet permuted("c", std::move(shuffled));

        EXPECT_EQ(coefficient_of_variation(set), coefficient_of_variation(permuted));
        EXPECT_EQ(mean_pairwise_dice(set), mean_pairwise_dice(permuted));
        EXPECT_EQ(mean_labelled_uncertainty(set), mean_labelled_uncertainty(permuted));
        const auto mean_a = mean_probability(set);
        const auto mean_b = mean_probability(permuted);
        for (std::size_t i = 0; i < mean_a.size(); ++i)
            ASSERT_EQ(mean_a.data()[i], mean_b.data()[i]);
        const auto map_a = uncertainty_map(set);
        const auto map_b = uncertainty_map(permuted);
        for (std::size_t i = 0; i < map_a.grid.size(); ++i)
            ASSERT_EQ(map_a.grid.data()[i], map_b.grid.data()[i]);
    }
}

TEST(Measures, InvariantUnderJobCount) {
    std::mt19937_64 rng(31);
    const SampleSet set = testutil::random_sample_set(rng, "c", Dims3{9, 7, 5}, 5);
    AnalysisOptions serial;
    AnalysisOptions parallel;
    parallel.jobs = 4;
    const CaseAnalysis a = analyze_case_full(set, nullptr, serial);
    const CaseAnalysis b = analyze_case_full(set, nullptr, parallel);
    EXPECT_EQ(a.report.cv, b.report.cv);
    EXPECT_EQ(a.report.d_pw, b.report.d_pw);
    EXPECT_EQ(a.report.u_labelled, b.report.u_labelled);
    EXPECT_EQ(a.report.consensus_voxels, b.report.consensus_voxels);
    for (std::size_t i = 0; i < a.uncertainty.grid.size(); ++i)
        ASSERT_EQ(a.uncertainty.grid.data()[i], b.uncertainty.grid.data()[i]);
}

TEST(AnalyzeCase, MatchesStandaloneFunctionsBitExactly) {
    std::mt19937_64 rng(37);
    for (int trial = 0; trial < 5; ++trial) {
        const SampleSet set = testutil::random_sample_set(rng, "c", Dims3{6, 6, 6}, 4);
        const BinaryMask gt = testutil::random_mask(rng, Dims3{6, 6, 6});
        AnalysisOptions opt;
        opt.threshold = 0.4;
        opt.entropy = trial % 2 ? EntropyVariant::binary : EntropyVariant::as_printed;
        opt.cv = trial % 2 ? CvVariant::std_over_mean : CvVariant::as_printed;

        const CaseAnalysis full = analyze_case_full(set, &gt, opt);
        EXPECT_EQ(full.report.cv, coefficient_of_variation(set, opt.threshold, opt.cv));
        EXPECT_EQ(full.report.d_pw, mean_pairwise_dice(set, opt.threshold));
        EXPECT_EQ(full.report.u_labelled,
                  mean_labelled_uncertainty(set, opt.threshold, opt.entropy));
        const BinaryMask consensus = consensus_mask(set, opt.threshold);
        EXPECT_EQ(testutil::to_plain(full.consensus), testutil::to_plain(consensus));
        EXPECT_EQ(full.report.consensus_voxels, consensus.foreground_count());
        const UncertaintyMap map = uncertainty_map(set, opt.entropy);
        for (std::size_t i = 0; i < map.grid.size(); ++i)
            ASSERT_EQ(full.uncertainty.grid.data()[i], map.grid.data()[i]);
        ASSERT_TRUE(full.report.dice_vs_gt.has_value());
        EXPECT_EQ(*full.report.dice_vs_gt, dice(consensus, gt));
        EXPECT_EQ(full.report.threshold, opt.threshold);
        EXPECT_EQ(full.report.n_samples, 4);
        EXPECT_EQ(full.report.case_id, "c");
    }
}

TEST(AnalyzeCase, RejectsMismatchedGroundTruth) {
    std::mt19937_64 rng(41);
    const SampleSet set = testutil::random_sample_set(rng, "c", Dims3{4, 4, 4}, 3);
    const BinaryMask gt = testutil::random_mask(rng, Dims3{4, 4, 3});
    EXPECT_THROW(analyze_case_full(set, &gt, {}), std::invalid_argument);
}

TEST(OracleAgreement, RandomizedSampleSets) {
    std::mt19937_64 rng(43);
    std::uniform_int_distribution<index_t> dim(1, 8);
    const std::size_t counts[] = {2, 3, 5, 10};
    for (int trial = 0; trial < 25; ++trial) {
        const Dims3 dims{dim(rng), dim(rng), dim(rng)};
        const std::size_t n = counts[static_cast<std::size_t>(trial) % 4];
        const SampleSet set = testutil::random_sample_set(rng, "c", dims, n);
        const auto plain = testutil::to_plain(set);

        EXPECT_NEAR(coefficient_of_variation(set), oracle::cv(plain, 0.5), 1e-9);
        EXPECT_NEAR(mean_pairwise_dice(set), oracle::mean_pairwise_dice(plain, 0.5), 1e-9);

        const auto u_lib = mean_labelled_uncertainty(set);
        const auto u_ref = oracle::labelled_uncertainty(plain, 0.5);
        ASSERT_EQ(u_lib.has_value(), u_ref.has_value());
        if (u_lib) {
            EXPECT_NEAR(*u_lib, *u_ref, 1e-9);
        }

        const auto mask_lib = testutil::to_plain(consensus_mask(set));
        const auto mask_ref = oracle::binarize(oracle::mean_volume(plain), 0.5);
        ASSERT_EQ(mask_lib, mask_ref);

        const auto map_lib = uncertainty_map(set);
        const auto map_ref = oracle::entropy_map(plain, false);
        for (std::size_t i = 0; i < map_ref.size(); ++i)
            ASSERT_NEAR(map_lib.grid.data()[i], map_ref[i], 1e-9);

        const auto bin_lib = uncertainty_map(set, EntropyVariant::binary);
        const auto bin_ref = oracle::entropy_map(plain, true);
        for (std::size_t i = 0; i < bin_ref.size(); ++i)
            ASSERT_NEAR(bin_lib.grid.data()[i], bin_ref[i], 1e-9);
    }
}

TEST(VariantParsing, RoundTrips) {
    EXPECT_EQ(entropy_variant_from_string(to_string(EntropyVariant::binary)),
              EntropyVariant::binary);
    EXPECT_EQ(cv_variant_from_string(to_string(CvVariant::std_over_mean)),
              CvVariant::std_over_mean);
    EXPECT_THROW(entropy_variant_from_string("wat"), std::invalid_argument);
    EXPECT_THROW(cv_variant_from_string("wat"), std::invalid_argument);
}

}  // namespace
