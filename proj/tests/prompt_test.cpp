#include <gtest/gtest.h>

#include <random>

#include "planforge/constraints_io.hpp"
#include "planforge/prompt.hpp"
#include "support/fixtures.hpp"

using namespace planforge;

namespace {

RoomRef ref(Label c) { return {c, std::nullopt}; }
RoomRef ref(Label c, int i) { return {c, i}; }

bool has_connection(const ConstraintSet& cs, RoomRef a, RoomRef b) {
    const Connection want = Connection{a, b}.normalized();
    for (const auto& c : *cs.connections)
        if (c.normalized() == want) return true;
    return false;
}

long long area_of(const ConstraintSet& cs, RoomRef r) {
    for (const auto& a : *cs.areas)
        if (a.ref == r) return a.area;
    return -1;
}

std::size_t parse_error_position(const std::string& text) {
    try {
        parse_prompt(text);
    } catch (const ParseError& e) {
        return e.position();
    }
    return std::string::npos;
}

}  // namespace

TEST(EmitPrompt, ReproducesReferenceRow1) {
    const std::string text = emit_prompt(fixtures::reference_row1_graph(), 100.0);
    EXPECT_EQ(text, fixtures::normalize_commas(fixtures::kReferencePromptRow1));
}

TEST(EmitPrompt, CountsOnly) {
    const std::string text =
        emit_prompt(fixtures::reference_row1_graph(), 100.0, {true, false, false});
    EXPECT_EQ(text, "<p>The room has 2_bedroom, 1_bathroom, 1_living_room, 1_kitchen, 1_balcony.</p>");
    EXPECT_EQ(text.find("_space_"), std::string::npos);
    EXPECT_EQ(text.find("connect"), std::string::npos);
}

TEST(EmitPrompt, SingletonAreaTokenHasNoIndex) {
    const std::string text = emit_prompt(fixtures::reference_row1_graph(), 100.0, {false, true, false});
    EXPECT_NE(text.find("kitchen_space_5"), std::string::npos);
    EXPECT_EQ(text.find("kitchen1"), std::string::npos);
    EXPECT_NE(text.find("bedroom2_space_11"), std::string::npos);
}

TEST(EmitPrompt, EmptyGraphWithCountsIsAnError) {
    KnowledgeGraph kg;
    try {
        emit_prompt(kg, 100.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "EmptyGraph");
    }
    EXPECT_EQ(emit_prompt(kg, 100.0, {false, true, true}), "<p>The room has.</p>");
}

TEST(EmitPrompt, AreaTokensRoundAndStayPositive) {
    EXPECT_EQ(area_token(1749, 100.0), 17);
    EXPECT_EQ(area_token(1750, 100.0), 18);
    EXPECT_EQ(area_token(3, 100.0), 1);
    EXPECT_THROW(area_token(10, 0.0), Error);
}

TEST(ParsePrompt, ReferenceRow1) {
    const ConstraintSet cs = parse_prompt(fixtures::kReferencePromptRow1);
    ASSERT_TRUE(cs.counts && cs.areas && cs.connections);
    EXPECT_EQ(*cs.counts, (std::map<Label, int>{{Label::bedroom, 2},
                                                 {Label::bathroom, 1},
                                                 {Label::living, 1},
                                                 {Label::kitchen, 1},
                                                 {Label::balcony, 1}}));
    EXPECT_EQ(cs.areas->size(), 6u);
    EXPECT_EQ(area_of(cs, ref(Label::living)), 73);
    EXPECT_EQ(area_of(cs, ref(Label::bedroom, 1)), 17);
    EXPECT_EQ(area_of(cs, ref(Label::bedroom, 2)), 11);
    EXPECT_EQ(area_of(cs, ref(Label::bathroom)), 5);
    EXPECT_EQ(area_of(cs, ref(Label::kitchen)), 5);
    EXPECT_EQ(area_of(cs, ref(Label::balcony)), 7);
    EXPECT_EQ(cs.connections->size(), 9u);
    EXPECT_TRUE(has_connection(cs, ref(Label::bedroom, 1), ref(Label::bathroom)));
    EXPECT_TRUE(has_connection(cs, ref(Label::living), ref(Label::kitchen)));
    EXPECT_TRUE(check_consistency(cs).empty());
}

TEST(ParsePrompt, ReferenceRow1MatchesGraphConstraints) {
    EXPECT_EQ(parse_prompt(fixtures::kReferencePromptRow1),
              kg_to_constraints(fixtures::reference_row1_graph(), 100.0));
}

TEST(ParsePrompt, ReferenceRow2FlagsBedroom3) {
    const ConstraintSet cs = parse_prompt(fixtures::kReferencePromptRow2);
    EXPECT_EQ(cs.areas->size(), 6u);
    EXPECT_EQ(cs.connections->size(), 10u);
    const auto warnings = check_consistency(cs);
    ASSERT_EQ(warnings.size(), 1u);
    EXPECT_EQ(warnings[0].kind, ConsistencyWarning::Kind::IndexExceedsCount);
    EXPECT_EQ(warnings[0].ref, ref(Label::bedroom, 3));
    EXPECT_EQ(warnings[0].code(), "IndexExceedsCount");
}

TEST(ParsePrompt, ReferenceRow3) {
    const ConstraintSet cs = parse_prompt(fixtures::kReferencePromptRow3);
    EXPECT_EQ(cs.counts->at(Label::bedroom), 3);
    EXPECT_EQ(area_of(cs, ref(Label::bedroom, 1)), 20);
    EXPECT_EQ(area_of(cs, ref(Label::bedroom, 2)), 18);
    EXPECT_EQ(area_of(cs, ref(Label::bedroom, 3)), 7);
    EXPECT_EQ(cs.connections->size(), 10u);
    EXPECT_TRUE(check_consistency(cs).empty());
}

TEST(ParsePrompt, MissingAreaSection) {
    const ConstraintSet cs =
        parse_prompt("<p>The room has 2_bedroom, 1_living_room, bedroom_1 connect living_room, "
                     "bedroom_2 connect living_room.</p>");
    EXPECT_TRUE(cs.counts.has_value());
    EXPECT_FALSE(cs.areas.has_value());
    ASSERT_TRUE(cs.connections.has_value());
    EXPECT_EQ(cs.connections->size(), 2u);
}

TEST(ParsePrompt, AcceptsBothAreaSpellings) {
    const ConstraintSet a = parse_prompt("bedroom1_space_17, bathroom_space_5");
    const ConstraintSet b = parse_prompt("The room has bedroom_1_space_17 , bathroom _space_ 5.");
    EXPECT_EQ(a, b);
    EXPECT_EQ(area_of(a, ref(Label::bedroom, 1)), 17);
}

TEST(ParsePrompt, LivingAlias) {
    const ConstraintSet cs = parse_prompt("1_living, living connect kitchen");
    EXPECT_EQ(cs.counts->at(Label::living), 1);
    EXPECT_TRUE(has_connection(cs, ref(Label::living), ref(Label::kitchen)));
}

TEST(ParsePrompt, EmptyTextFailsAtZero) {
    EXPECT_EQ(parse_error_position(""), 0u);
    EXPECT_EQ(parse_error_position("   \n"), 0u);
}

TEST(ParsePrompt, MalformedClausesPointAtTheClause) {
    const std::string text = "2_bedroom, garage_space_4";
    EXPECT_EQ(parse_error_position(text), text.find("garage"));
    EXPECT_EQ(parse_error_position("2_bedroom,, 1_kitchen"), 10u);
    EXPECT_NE(parse_error_position("bedroom_0 connect kitchen"), std::string::npos);
    EXPECT_NE(parse_error_position("bedroom1_space_0"), std::string::npos);
    EXPECT_NE(parse_error_position("kitchen connect"), std::string::npos);
    EXPECT_NE(parse_error_position("<p>The room has 1_kitchen."), std::string::npos);
    EXPECT_NE(parse_error_position("1_kitchen, 2_kitchen"), std::string::npos);
}

TEST(ParsePrompt, EmptyBodyMeansNoSections) {
    EXPECT_TRUE(parse_prompt("<p>The room has.</p>").empty());
}

TEST(Consistency, DuplicateConnectionEitherOrientation) {
    const auto w = check_consistency(parse_prompt("bedroom_1 connect kitchen, kitchen connect bedroom_1"));
    ASSERT_EQ(w.size(), 1u);
    EXPECT_EQ(w[0].kind, ConsistencyWarning::Kind::DuplicateConnection);
}

TEST(Consistency, DuplicateArea) {
    const auto w = check_consistency(parse_prompt("kitchen_space_5, kitchen_space_6"));
    ASSERT_EQ(w.size(), 1u);
    EXPECT_EQ(w[0].kind, ConsistencyWarning::Kind::DuplicateArea);
}

TEST(Consistency, IndexCheckNeedsCounts) {
    EXPECT_TRUE(check_consistency(parse_prompt("bedroom_5 connect kitchen")).empty());
    const auto w = check_consistency(parse_prompt("1_bedroom, storage connect bedroom_1"));
    ASSERT_EQ(w.size(), 1u);
    EXPECT_EQ(w[0].ref, ref(Label::storage));
}

TEST(KgToConstraints, EmptyGraphIsAllAbsent) {
    EXPECT_TRUE(kg_to_constraints(KnowledgeGraph{}, 100.0).empty());
}

TEST(KgToConstraints, CountsThreeBedrooms) {
    KnowledgeGraph kg;
    kg.image_width = kg.image_height = 100;
    for (int i = 0; i < 3; ++i)
        kg.nodes.push_back(fixtures::node(i, Label::bedroom, i + 1, 100 - i, {i * 20, 0, i * 20 + 9, 9}));
    EXPECT_EQ(kg_to_constraints(kg, 10.0).counts->at(Label::bedroom), 3);
}

TEST(RoundTrip, ParseOfEmitEqualsGraphConstraints) {
    std::mt19937_64 rng(42);
    for (int i = 0; i < 300; ++i) {
        const KnowledgeGraph kg = fixtures::random_graph(rng);
        for (int mask = 0; mask < 8; ++mask) {
            const Sections s{(mask & 1) != 0, (mask & 2) != 0, (mask & 4) != 0};
            if (s.counts && kg.nodes.empty()) continue;
            const std::string text = emit_prompt(kg, 37.5, s);
            EXPECT_EQ(parse_prompt(text), kg_to_constraints(kg, 37.5, s)) << text;
        }
    }
}

TEST(ConstraintDocument, RoundTrip) {
    const ConstraintSet cs = parse_prompt(fixtures::kReferencePromptRow2);
    const auto warnings = check_consistency(cs);
    const std::string doc = serialize_constraints(cs, warnings);
    EXPECT_NE(doc.find("IndexExceedsCount"), std::string::npos);
    EXPECT_EQ(deserialize_constraints(doc), cs);

    const ConstraintSet partial = parse_prompt("2_bedroom");
    EXPECT_EQ(deserialize_constraints(serialize_constraints(partial)), partial);
}

TEST(ConstraintDocument, RejectsBadRefs) {
    EXPECT_THROW(deserialize_constraints(R"({"connections": [["attic", "kitchen"]]})"), Error);
    EXPECT_THROW(deserialize_constraints(R"({"rooms": 3})"), Error);
}
