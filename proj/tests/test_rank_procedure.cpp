#include "covrank/error.hpp"
#include "covrank/rank_procedure.hpp"
#include "covrank/simmodels.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace covrank;
using namespace covrank::testing;

TEST(ChooseD, Defaults) {
    EXPECT_EQ(choose_d(25).d, 12);
    EXPECT_EQ(choose_d(50).d, 24);
    EXPECT_EQ(choose_d(3).d, 1);
    EXPECT_FALSE(choose_d(25).warning.has_value());
}

TEST(ChooseD, Overrides) {
    auto c = choose_d(25, 5);
    EXPECT_EQ(c.d, 5);
    EXPECT_FALSE(c.warning.has_value());
    c = choose_d(25, 20);
    EXPECT_EQ(c.d, 12);
    EXPECT_TRUE(c.warning.has_value());
    EXPECT_THROW(choose_d(25, 0), DataError);
    EXPECT_THROW(choose_d(2), DataError);
}

namespace {

void check_report_invariants(const RankReport& r) {
    ASSERT_EQ(static_cast<int>(r.per_q.size()), r.d);
    bool seen_untested = false;
    for (std::size_t i = 0; i < r.per_q.size(); ++i) {
        const auto& rec = r.per_q[i];
        EXPECT_EQ(rec.q, static_cast<int>(i) + 1);
        EXPECT_GT(rec.p_value, 0.0);
        EXPECT_LE(rec.p_value, 1.0);
        if (!rec.tested) seen_untested = true;
        EXPECT_FALSE(seen_untested && rec.tested) << "tested set is not a prefix";
        if (i > 0) EXPECT_LE(rec.statistic, r.per_q[i - 1].statistic);
    }
    if (r.r_hat) {
        const int k = *r.r_hat;
        EXPECT_FALSE(r.global_null_rejected);
        EXPECT_GT(r.per_q[static_cast<std::size_t>(k - 1)].p_value, r.alpha);
        for (int q = 1; q < k; ++q) EXPECT_LE(r.per_q[static_cast<std::size_t>(q - 1)].p_value, r.alpha);
        for (int q = k + 1; q <= r.d; ++q) EXPECT_FALSE(r.per_q[static_cast<std::size_t>(q - 1)].tested);
    } else {
        EXPECT_TRUE(r.global_null_rejected);
        for (const auto& rec : r.per_q) EXPECT_LE(rec.p_value, r.alpha);
    }
    EXPECT_EQ(r.scree.size(), r.per_q.size());
}

}  // namespace

TEST(SequentialRankTest, RankOneNoiseless) {
    std::mt19937_64 rng(3);
    const Matrix s = random_matrix(60, 1, rng);
    const Matrix W = s * Vector::LinSpaced(9, 0.5, 1.5).transpose();
    BootstrapConfig cfg;
    cfg.B = 50;
    cfg.d = 4;
    const RankReport r = sequential_rank_test(SampleMatrix(W, Grid::regular(9)), 0.05, cfg);
    ASSERT_TRUE(r.r_hat.has_value());
    EXPECT_EQ(*r.r_hat, 1);
    check_report_invariants(r);
}

TEST(SequentialRankTest, A1FindsThree) {
    const auto gen = generate_model(named_model("A1"), 150, 25, 11);
    BootstrapConfig cfg;
    cfg.B = 100;
    cfg.d = 12;
    cfg.seed = 4;
    const RankReport r = sequential_rank_test(gen.data, 0.05, cfg);
    check_report_invariants(r);
    ASSERT_TRUE(r.r_hat.has_value());
    EXPECT_EQ(*r.r_hat, 3);
}

TEST(SequentialRankTest, GlobalRejectionWhenDTooSmall) {
    const auto gen = generate_model(named_model("A5"), 150, 25, 2);
    BootstrapConfig cfg;
    cfg.B = 50;
    cfg.d = 2;
    const RankReport r = sequential_rank_test(gen.data, 0.05, cfg);
    check_report_invariants(r);
    EXPECT_FALSE(r.r_hat.has_value());
    EXPECT_TRUE(r.global_null_rejected);
}

TEST(SequentialRankTest, WarnsWhenDExceedsLimit) {
    const auto gen = generate_model(named_model("A1"), 40, 9, 2);
    BootstrapConfig cfg;
    cfg.B = 10;
    cfg.d = 5;
    const RankReport r = sequential_rank_test(gen.data, 0.05, cfg);
    EXPECT_FALSE(r.warnings.empty());
}

TEST(SequentialRankTest, DeterministicAcrossThreads) {
    const auto gen = generate_model(named_model("A1"), 80, 13, 6);
    BootstrapConfig cfg;
    cfg.B = 40;
    cfg.d = 6;
    cfg.seed = 21;
    const RankReport a = sequential_rank_test(gen.data, 0.05, cfg);
    cfg.threads = 4;
    RankReport b = sequential_rank_test(gen.data, 0.05, cfg);
    EXPECT_EQ(a.per_q, b.per_q);
    EXPECT_EQ(a.r_hat, b.r_hat);
}

TEST(SequentialRankTest, Errors) {
    const auto gen = generate_model(named_model("A1"), 20, 9, 1);
    BootstrapConfig cfg;
    cfg.B = 5;
    cfg.d = 3;
    EXPECT_THROW(sequential_rank_test(gen.data, 0.0, cfg), DataError);
    EXPECT_THROW(sequential_rank_test(gen.data, 1.0, cfg), DataError);
    cfg.d = 10;
    EXPECT_THROW(sequential_rank_test(gen.data, 0.05, cfg), DataError);
}
