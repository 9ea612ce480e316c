#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "stance/corpus.hpp"
#include "stance/format.hpp"
#include "support.hpp"

using namespace stance;

namespace {

const char* kThreeRows =
    "id,text,target,stance_a,stance_b\n"
    "1,Cimbom bugün harika,TARGET1,FAVOR,FAVOR\n"
    "2,olmaz böyle maç,TARGET2,Neutral,AGAINST\n"
    "3,\"tırnak \"\"içinde\"\", virgül\",TARGET2,AGAINST,\n";

}  // namespace

TEST(Corpus, LoadsVersion1SizedFile) {
    const auto text = serialize_dataset(fixtures::version1_like());
    const auto ds = parse_dataset(text);
    EXPECT_EQ(ds.size(), 700u);
    for (auto t : kTargets)
        for (auto s : kStanceLabels) EXPECT_EQ(ds.count(t, s), 175u);
}

TEST(Corpus, HeaderOnlyIsNoRecords) {
    try {
        parse_dataset("id,text,target,stance_a,stance_b\n");
        FAIL() << "expected an error";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("no records"), std::string::npos) << e.what();
    }
}

TEST(Corpus, UnknownLabelNamesTheRow) {
    try {
        parse_dataset(kThreeRows);
        FAIL() << "expected an error";
    } catch (const DataError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("row 2"), std::string::npos) << msg;
        EXPECT_NE(msg.find("Neutral"), std::string::npos) << msg;
    }
}

TEST(Corpus, RejectsDuplicateIdAndUnknownTarget) {
    EXPECT_THROW(parse_dataset("id,text,target,stance_a,stance_b\n1,a,TARGET1,FAVOR,\n1,b,TARGET1,FAVOR,\n"),
                 DataError);
    EXPECT_THROW(parse_dataset("id,text,target,stance_a,stance_b\n1,a,TARGET3,FAVOR,\n"), DataError);
    EXPECT_THROW(parse_dataset("id,text,target\n1,a,TARGET1\n"), DataError);
}

TEST(Corpus, QuotedFieldsAndOptionalSecondLabel) {
    const std::string fixed = std::string(kThreeRows).replace(std::string(kThreeRows).find("Neutral"), 7, "FAVOR");
    const auto ds = parse_dataset(fixed);
    ASSERT_EQ(ds.size(), 3u);
    EXPECT_EQ(ds.tweets()[2].text, "tırnak \"içinde\", virgül");
    EXPECT_FALSE(ds.tweets()[2].label_b.has_value());
    EXPECT_EQ(ds.tweets()[1].label_b, StanceLabel::Against);
}

TEST(Corpus, EmptyTextIsAccepted) {
    const auto ds = parse_dataset("id,text,target,stance_a,stance_b\n7,,TARGET1,AGAINST,AGAINST\n");
    EXPECT_EQ(ds.tweets()[0].text, "");
}

TEST(Corpus, SerializationRoundTripsByteIdentically) {
    const std::string canonical =
        "id,text,target,stance_a,stance_b\n"
        "a1,düz metin,TARGET1,FAVOR,FAVOR\n"
        "a2,\"virgül, ve \"\"tırnak\"\"\",TARGET2,AGAINST,\n"
        "a3,\"çok\nsatırlı\",TARGET1,AGAINST,FAVOR\n";
    EXPECT_EQ(serialize_dataset(parse_dataset(canonical)), canonical);
    const auto v1 = serialize_dataset(fixtures::version1_like());
    EXPECT_EQ(serialize_dataset(parse_dataset(v1)), v1);
}

TEST(Agreement, MatchingPercentages) {
    const auto ds = fixtures::version1_like();
    const auto all = match_counts(ds);
    EXPECT_EQ(all.n_match, 686u);
    EXPECT_DOUBLE_EQ(matching_percentage(ds), 0.98);
    const auto t1 = match_counts(ds, TargetId::Target1);
    const auto t2 = match_counts(ds, TargetId::Target2);
    EXPECT_EQ(t1.n_match, 346u);
    EXPECT_EQ(t2.n_match, 340u);
    EXPECT_NEAR(matching_percentage(ds, TargetId::Target1), 346.0 / 350.0, 1e-15);
    EXPECT_EQ(format_ratio_percent(346, 350, 2), "98.86");
    EXPECT_EQ(format_ratio_percent(340, 350, 2), "97.14");
    EXPECT_EQ(format_ratio_percent(686, 700, 2), "98.00");
}

TEST(Agreement, PerfectAgreementIsOne) {
    const std::size_t none[2][2] = {{0, 0}, {0, 0}};
    EXPECT_EQ(matching_percentage(fixtures::dual_annotated_corpus(5, none)), 1.0);
}

TEST(Agreement, MissingSecondLabelIsAnError) {
    const auto ds = parse_dataset("id,text,target,stance_a,stance_b\n1,a,TARGET1,FAVOR,\n");
    EXPECT_THROW(matching_percentage(ds), PreconditionError);
}

TEST(Agreement, KappaValues) {
    EXPECT_NEAR(cohens_kappa(0.98, 0.5), 0.96, 1e-12);
    EXPECT_NEAR(cohens_kappa(0.9681, 0.5), 0.9362, 1e-12);
    for (double pe : {0.0, 0.25, 0.5, 0.9}) {
        EXPECT_NEAR(cohens_kappa(pe, pe), 0.0, 1e-15);
        EXPECT_NEAR(cohens_kappa(1.0, pe), 1.0, 1e-15);
    }
    EXPECT_THROW(cohens_kappa(0.5, 1.0), PreconditionError);
    EXPECT_THROW(cohens_kappa(1.2, 0.5), PreconditionError);
}

TEST(Agreement, KappaStrictlyIncreasingInObservedAgreement) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const double pe = 0.99 * u(rng), a = u(rng), b = u(rng);
        if (a == b) continue;
        EXPECT_EQ(a < b, cohens_kappa(a, pe) < cohens_kappa(b, pe));
    }
}

TEST(Agreement, ReportWithFixedChance) {
    const auto r = agreement_report(fixtures::version1_like());
    EXPECT_EQ(r.n_total, 700u);
    EXPECT_EQ(r.n_match, 686u);
    EXPECT_DOUBLE_EQ(r.p_o, 0.98);
    EXPECT_EQ(r.p_e, 0.5);
    EXPECT_NEAR(r.kappa, 0.96, 1e-12);
}

TEST(Agreement, TotalDisagreementIsMinusOne) {
    const std::size_t all[2][2] = {{3, 3}, {3, 3}};
    EXPECT_NEAR(agreement_report(fixtures::dual_annotated_corpus(3, all)).kappa, -1.0, 1e-15);
}

TEST(Agreement, FourHundredTweetExtension) {
    // 100 per cell, 21 disagreements spread over the cells.
    const std::size_t d[2][2] = {{5, 6}, {4, 6}};
    const auto r = agreement_report(fixtures::dual_annotated_corpus(100, d));
    EXPECT_EQ(r.n_match, 379u);
    EXPECT_DOUBLE_EQ(r.p_o, 379.0 / 400.0);
    EXPECT_DOUBLE_EQ(r.p_o, 0.9475);
}

TEST(Agreement, MarginalChanceModel) {
    // Annotator A: 3 Favor of 4; B: 2 Favor of 4; one disagreement.
    const auto ds = parse_dataset(
        "id,text,target,stance_a,stance_b\n"
        "1,a,TARGET1,FAVOR,FAVOR\n2,b,TARGET1,FAVOR,FAVOR\n3,c,TARGET1,FAVOR,AGAINST\n4,d,TARGET1,AGAINST,AGAINST\n");
    const auto r = agreement_report(ds, std::nullopt, ChanceModel::Marginal);
    const double pe = 0.75 * 0.5 + 0.25 * 0.5;
    EXPECT_DOUBLE_EQ(r.p_e, pe);
    EXPECT_NEAR(r.kappa, (0.75 - pe) / (1 - pe), 1e-15);
}

TEST(Agreement, ConsensusSubset) {
    const auto ds = fixtures::version1_like();
    const auto c = consensus_subset(ds);
    EXPECT_EQ(c.size(), 686u);
    std::set<std::string> dropped;
    for (const auto& t : ds.tweets())
        if (t.label_a != t.label_b) dropped.insert(t.id);
    EXPECT_EQ(dropped.size(), 14u);
    for (const auto& t : c.tweets()) {
        EXPECT_FALSE(dropped.count(t.id));
        EXPECT_EQ(t.label_b, t.label_a);
    }
    const auto again = consensus_subset(c);
    EXPECT_EQ(serialize_dataset(again), serialize_dataset(c));
    EXPECT_EQ(c.size(), match_counts(ds).n_match);
}

TEST(Manifest, ValidatesDeclaredCounts) {
    const auto ds = fixtures::version1_like();
    auto m = Manifest::parse("# declared\ntotal=700\nTARGET1.FAVOR=175\nname.TARGET1=Kulüp A\n");
    EXPECT_NO_THROW(validate_counts(ds, m));
    EXPECT_EQ(apply_target_names(ds, m).target(TargetId::Target1).display_name, "Kulüp A");
    m.set("TARGET2.AGAINST", "170");
    EXPECT_THROW(validate_counts(ds, m), DataError);
    EXPECT_THROW(Manifest::parse("novalue\n"), DataError);
}

TEST(Format, RoundingModes) {
    EXPECT_EQ(format_fixed(82.45, 1, Rounding::HalfUp), "82.5");
    EXPECT_EQ(format_fixed(80.65, 1, Rounding::HalfUp), "80.7");
    EXPECT_EQ(format_fixed(80.65, 1, Rounding::HalfEven), "80.6");
    EXPECT_EQ(format_fixed(82.45, 1, Rounding::HalfEven), "82.4");
    EXPECT_EQ(format_fixed(-0.04, 1), "0.0");
    EXPECT_EQ(format_fixed(-1.25, 1), "-1.3");
    EXPECT_EQ(format_fixed(100.0, 1), "100.0");
    EXPECT_EQ(format_ratio_percent(1065, 1100, 2), "96.82");
    EXPECT_EQ(format_ratio_percent(1, 8, 1, Rounding::HalfEven), "12.5");
    EXPECT_EQ(format_ratio_percent(1, 16, 2, Rounding::HalfEven), "6.25");
    EXPECT_EQ(format_ratio_percent(1, 16, 1, Rounding::HalfEven), "6.2");
    EXPECT_EQ(format_ratio_percent(1, 16, 1, Rounding::HalfUp), "6.3");
    EXPECT_DOUBLE_EQ(round_decimal(98.857, 2, Rounding::HalfUp), 98.86);
}

TEST(Format, ExactRendering) {
    for (double v : {0.1, 1.0 / 3.0, 1e-3, 123456.789, -2.5e-12}) EXPECT_EQ(std::stod(format_exact(v)), v);
    EXPECT_EQ(format_exact(1.0), "1");
}
