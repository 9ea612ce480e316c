#include <gtest/gtest.h>

#include <random>

#include "properties.hpp"
#include "stance/ner.hpp"
#include "support.hpp"

using namespace stance;

namespace {

Gazetteer clubs() {
    return Gazetteer::parse(
        "# synthetic\n"
        "ORG\tGalatasaray\n"
        "ORG\tFenerbahçe\n"
        "LOC\tKadıköy\n"
        "LOC\tİstanbul\n"
        "PER\tFatih Terim\n"
        "PER\tFatih\n"
        "ORG\tTürk Telekom Arena\n");
}

struct Expected {
    std::size_t start, end;
    EntityType type;
};

void expect_spans(const std::vector<EntitySpan>& got, const std::vector<Expected>& want) {
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
        EXPECT_EQ(got[i].start, want[i].start) << i;
        EXPECT_EQ(got[i].end, want[i].end) << i;
        EXPECT_EQ(got[i].etype, want[i].type) << i;
    }
}

}  // namespace

TEST(DiacriticsFold, Examples) {
    EXPECT_EQ(diacritics_fold("Fenerbahçe"), "fenerbahce");
    EXPECT_EQ(diacritics_fold("abc"), "abc");
    EXPECT_EQ(diacritics_fold("Kadıköy"), "kadikoy");
    EXPECT_EQ(diacritics_fold("ÇĞIİÖŞÜ"), "cgiiosu");
}

TEST(DiacriticsFold, Idempotent) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
        const auto s = fixtures::random_text(rng);
        const auto once = diacritics_fold(s);
        EXPECT_EQ(diacritics_fold(once), once) << s;
    }
}

TEST(Gazetteer, LookupVariants) {
    const auto g = clubs();
    EXPECT_EQ(g.lookup("Fenerbahçe"), EntityType::Organization);
    EXPECT_EQ(g.lookup("FENERBAHÇE"), EntityType::Organization);
    EXPECT_EQ(g.lookup("fenerbahce"), EntityType::Organization);
    EXPECT_EQ(g.lookup("istanbul"), EntityType::Location);
    EXPECT_EQ(g.lookup("fatih terim"), EntityType::Person);
    EXPECT_FALSE(g.lookup("Beşiktaş"));
    EXPECT_EQ(g.max_tokens(), 3u);
    EXPECT_THROW(Gazetteer::parse("TEAM\tX\n"), DataError);
}

TEST(Recognize, ApostropheSuffixIsExcluded) {
    const auto spans = recognize("Galatasaray'ı yendik", clubs());
    expect_spans(spans, {{0, 11, EntityType::Organization}});
    EXPECT_EQ(spans[0].surface, "Galatasaray");
}

TEST(Recognize, CapitalizationSwitch) {
    RecognizerOptions strict;
    strict.relax_capitalization = false;
    EXPECT_TRUE(recognize("galatasaray", clubs(), strict).empty());
    expect_spans(recognize("galatasaray", clubs(), {}), {{0, 11, EntityType::Organization}});
    expect_spans(recognize("Galatasaray", clubs(), strict), {{0, 11, EntityType::Organization}});
}

TEST(Recognize, DiacriticsSwitch) {
    RecognizerOptions no_fold;
    no_fold.fold_diacritics = false;
    EXPECT_TRUE(recognize("Fenerbahce kazandi", clubs(), no_fold).empty());
    expect_spans(recognize("Fenerbahce kazandi", clubs()), {{0, 10, EntityType::Organization}});
    expect_spans(recognize("KADIKOY", clubs()), {{0, 7, EntityType::Location}});
}

TEST(Recognize, EmptyGazetteer) { EXPECT_TRUE(recognize("Galatasaray", Gazetteer{}).empty()); }

TEST(Recognize, LongestMatchAndMultiToken) {
    expect_spans(recognize("Fatih Terim'in açıklaması", clubs()), {{0, 11, EntityType::Person}});
    expect_spans(recognize("Fatih, Terim", clubs()), {{0, 5, EntityType::Person}});
    expect_spans(recognize("bugün Türk Telekom Arena'da", clubs()), {{6, 24, EntityType::Organization}});
}

TEST(Recognize, UnmarkedSuffix) {
    expect_spans(recognize("Bu grup haşlar Galatasarayı :D", clubs()), {{15, 26, EntityType::Organization}});
    RecognizerOptions off;
    off.match_unmarked_suffixes = false;
    EXPECT_TRUE(recognize("Galatasarayı", clubs(), off).empty());
    // The whole key must be covered; a shorter stem never matches.
    EXPECT_TRUE(recognize("Galata", clubs()).empty());
}

TEST(Recognize, StrictMatchOutranksRelaxedOverlap) {
    // The longer "fatih Terim" needs relaxed capitalization, so the strict
    // "Terim Köy" takes the overlap.
    const auto g = Gazetteer::parse("PER\tFatih Terim\nLOC\tTerim Köy\n");
    expect_spans(recognize("fatih Terim Köy", g), {{6, 15, EntityType::Location}});
}

TEST(Recognize, MonotoneInOptions) {
    const auto g = clubs();
    std::mt19937_64 rng(11);
    const std::vector<std::string> words = {"Galatasaray", "galatasaray", "GALATASARAY'ın", "Fenerbahce", "fenerbahçeli",
                                            "Fatih",       "fatih",       "Terim",          "terim",      "Kadikoy'de",
                                            "İstanbul",    "istanbul",    "Türk",           "Telekom",    "arena",
                                            "Arena",       "maç",         ",",              "'",          "ve"};
    const auto subset = [](const std::vector<EntitySpan>& a, const std::vector<EntitySpan>& b) {
        for (const auto& s : a)
            if (std::find(b.begin(), b.end(), s) == b.end()) return false;
        return true;
    };
    for (int c = 0; c < 300; ++c) {
        std::string text;
        const auto n = 1 + rng() % 8;
        for (std::size_t i = 0; i < n; ++i) text += (i ? " " : "") + words[rng() % words.size()];
        for (bool caps : {false, true}) {
            RecognizerOptions a{caps, false, true}, b{caps, true, true};
            EXPECT_TRUE(subset(recognize(text, g, a), recognize(text, g, b))) << text;
        }
        RecognizerOptions a{false, false, true}, b{true, false, true};
        EXPECT_TRUE(subset(recognize(text, g, a), recognize(text, g, b))) << text;
        for (const auto& s : recognize(text, g)) {
            EXPECT_LT(s.start, s.end);
            EXPECT_EQ(unicode::length(s.surface), s.end - s.start);
        }
        EXPECT_NO_THROW(check_non_overlapping(recognize(text, g)));
    }
}

TEST(ScoreExact, SelfScoreIsPerfect) {
    const std::vector<EntitySpan> gold = {{0, 11, EntityType::Organization, ""}, {15, 22, EntityType::Location, ""}};
    const auto s = score_exact(gold, gold);
    EXPECT_EQ(s.tp, 2u);
    EXPECT_EQ(s.precision(), 1.0);
    EXPECT_EQ(s.recall(), 1.0);
    EXPECT_EQ(s.f1(), 1.0);
}

TEST(ScoreExact, OffByOneIsFalsePositiveAndNegative) {
    const auto s = score_exact({{0, 11, EntityType::Organization, ""}}, {{0, 12, EntityType::Organization, ""}});
    EXPECT_EQ(s.tp, 0u);
    EXPECT_EQ(s.fp, 1u);
    EXPECT_EQ(s.fn, 1u);
    const auto t = score_exact({{0, 11, EntityType::Organization, ""}}, {{0, 11, EntityType::Person, ""}});
    EXPECT_EQ(t.fp + t.fn, 2u);
}

TEST(ScoreExact, HandCountedHalf) {
    const auto s = score_exact({{0, 3, EntityType::Person, ""}, {5, 9, EntityType::Location, ""}},
                               {{0, 3, EntityType::Person, ""}, {10, 12, EntityType::Location, ""}});
    EXPECT_DOUBLE_EQ(s.precision(), 0.5);
    EXPECT_DOUBLE_EQ(s.recall(), 0.5);
    EXPECT_DOUBLE_EQ(s.f1(), 0.5);
}

TEST(ScoreExact, RejectsOverlapsAndIsSymmetric) {
    EXPECT_THROW(score_exact({{0, 5, EntityType::Person, ""}, {4, 8, EntityType::Person, ""}}, {}), DataError);
    std::mt19937_64 rng(5);
    for (int c = 0; c < 200; ++c) {
        std::vector<EntitySpan> a, b;
        for (std::size_t pos = 0; pos < 40; pos += 4) {
            const EntitySpan s{pos, pos + 1 + rng() % 3, static_cast<EntityType>(rng() % 3), ""};
            if (rng() % 2) a.push_back(s);
            if (rng() % 2) b.push_back(rng() % 4 ? s : EntitySpan{s.start, s.end + 1, s.etype, ""});
        }
        const auto ab = score_exact(a, b), ba = score_exact(b, a);
        EXPECT_EQ(ab.tp, ba.tp);
        EXPECT_EQ(ab.fp, ba.fn);
        EXPECT_EQ(ab.fn, ba.fp);
    }
    const NerScore zero;
    EXPECT_EQ(zero.precision(), 0.0);
    EXPECT_EQ(zero.f1(), 0.0);
}

TEST(Annotations, ParseValidateSerialize) {
    const auto ds = parse_dataset("id,text,target,stance_a,stance_b\nx,Galatasaray'ı yendik,TARGET1,FAVOR,\n");
    const auto ann = parse_annotations("x\t0\t11\tORG\n", ds);
    EXPECT_EQ(ann.at("x")[0].surface, "Galatasaray");
    EXPECT_EQ(serialize_annotations(ann, ds), "x\t0\t11\tORG\n");
    EXPECT_THROW(parse_annotations("y\t0\t11\tORG\n", ds), DataError);
    EXPECT_THROW(parse_annotations("x\t0\t99\tORG\n", ds), DataError);
    EXPECT_THROW(parse_annotations("x\t0\t11\tCLUB\n", ds), DataError);
    EXPECT_THROW(parse_annotations("x\t0\t5\tORG\nx\t3\t8\tLOC\n", ds), DataError);
}

TEST(NeStatistics, Version1DeclaredCounts) {
    const auto fx = fixtures::version1_annotated();
    const auto st = ne_statistics(fx.dataset, fx.gold);
    EXPECT_EQ(st.total(), 1174u);
    EXPECT_EQ(st.type_total(EntityType::Organization), 952u);
    EXPECT_EQ(st.type_total(EntityType::Person), 159u);
    EXPECT_EQ(st.type_total(EntityType::Location), 63u);
    EXPECT_EQ(st.cell_total(TargetId::Target2, StanceLabel::Against), 364u);
    EXPECT_NO_THROW(validate_ne_counts(st, fixtures::version1_ne_manifest()));
    auto wrong = fixtures::version1_ne_manifest();
    wrong.set("ne.total", "1175");
    EXPECT_THROW(validate_ne_counts(st, wrong), DataError);
}

TEST(NeStatistics, EmptyAndHandCounted) {
    const auto ds = parse_dataset(
        "id,text,target,stance_a,stance_b\n"
        "a,Galatasaray Kadıköy,TARGET1,FAVOR,\n"
        "b,Fatih Terim,TARGET1,AGAINST,\n"
        "c,Fenerbahçe Fenerbahçe,TARGET2,FAVOR,\n");
    EXPECT_EQ(ne_statistics(ds, {}).total(), 0u);
    const auto gold = parse_annotations("a\t0\t11\tORG\na\t12\t19\tLOC\nb\t0\t11\tPER\nc\t0\t10\tORG\nc\t11\t21\tORG\n", ds);
    const auto st = ne_statistics(ds, gold);
    EXPECT_EQ(st.counts[0][0], (std::array<std::size_t, 3>{0, 1, 1}));
    EXPECT_EQ(st.counts[0][1], (std::array<std::size_t, 3>{1, 0, 0}));
    EXPECT_EQ(st.counts[1][0], (std::array<std::size_t, 3>{0, 0, 2}));
    EXPECT_EQ(st.total(), 5u);
}

TEST(NerEvaluation, GoldAsPredictionAndRecognizer) {
    const auto ds = parse_dataset(
        "id,text,target,stance_a,stance_b\n"
        "a,Galatasaray'ı seviyorum,TARGET1,FAVOR,\n"
        "b,fenerbahce kadikoyde,TARGET2,AGAINST,\n");
    const auto gold = parse_annotations("a\t0\t11\tORG\nb\t0\t10\tORG\nb\t11\t18\tLOC\n", ds);
    const auto self = evaluate_ner(ds, gold, gold);
    EXPECT_EQ(self.overall.f1(), 1.0);
    const auto none = evaluate_ner(ds, gold, {});
    EXPECT_EQ(none.overall.recall(), 0.0);
    // "kadikoyde" carries an unmarked suffix and no diacritics.
    const auto auto_pred = evaluate_ner(ds, gold, recognize_dataset(ds, clubs()));
    EXPECT_EQ(auto_pred.overall.tp, 3u);
    RecognizerOptions strict{false, false, false};
    const auto strict_pred = evaluate_ner(ds, gold, recognize_dataset(ds, clubs(), strict));
    EXPECT_EQ(strict_pred.overall.tp, 1u);
    EXPECT_EQ(strict_pred.cells[1][1].fn, 2u);
}
