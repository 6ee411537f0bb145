#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "scfred/degen.hpp"
#include "scfred/errors.hpp"

using namespace scfred;
using namespace scfred::degen;

namespace {

std::vector<std::pair<std::string, double>> chain_points(int n) {
    std::vector<std::pair<std::string, double>> pts;
    for (int i = 0; i < n; ++i) pts.emplace_back("c" + std::to_string(i), static_cast<double>(i));
    return pts;
}

}  // namespace

TEST_CASE("morse structures validate for up to eight points") {
    for (int n = 2; n <= 8; ++n) {
        auto ps = morse_structure(chain_points(n));
        auto rep = validate_structure(ps.structure);
        CHECK(rep.all_pass());
        CHECK(rep.diagonal_relators.empty());
    }
    CHECK(morse_structure(chain_points(2)).structure.labels.size() == 1);
    CHECK(morse_structure(chain_points(2)).structure.relators.empty());
    CHECK(morse_structure(chain_points(3)).structure.labels.size() == 3);
    CHECK(morse_structure(chain_points(3)).structure.relators.size() == 1);
    CHECK(morse_structure(chain_points(5)).structure.labels.size() == 10);
    CHECK(morse_structure(chain_points(5)).structure.relators.size() == 10);
}

TEST_CASE("duplicate critical values violate the total order") {
    CHECK_THROWS_AS(morse_structure({{"a", 0.0}, {"b", 0.0}, {"c", 1.0}}),
                    TotalOrderViolationError);
}

TEST_CASE("axiom violations carry witnesses") {
    SUBCASE("self-referential relator breaks finiteness") {
        auto s = DegenerationStructure::from_labels({"A", "B"}, {{"A", "B", "A"}});
        auto rep = validate_structure(s);
        CHECK_FALSE(rep.finiteness.pass);
        REQUIRE_FALSE(rep.finiteness.witnesses.empty());
        CHECK(rep.finiteness.witnesses[0].find("A") != std::string::npos);
        CHECK_FALSE(rep.source_target_distinct.pass);
    }

    SUBCASE("minimality violation on an indecomposable left source") {
        auto s = DegenerationStructure::from_labels({"A", "B", "B2", "C"},
                                                    {{"A", "B", "C"}, {"A", "B2", "C"}});
        auto rep = validate_structure(s);
        CHECK_FALSE(rep.minimality.pass);
        REQUIRE_FALSE(rep.minimality.witnesses.empty());
    }

    SUBCASE("missing dual short sequence breaks associativity") {
        auto s = DegenerationStructure::from_labels({"Z", "A", "B", "I", "E"},
                                                    {{"A", "B", "Z"}, {"I", "E", "B"}});
        auto rep = validate_structure(s);
        CHECK_FALSE(rep.associativity.pass);
        REQUIRE_FALSE(rep.associativity.witnesses.empty());
    }

    SUBCASE("diagonal relators are flagged but pass") {
        auto s = DegenerationStructure::from_labels({"A", "Z"}, {{"A", "A", "Z"}});
        auto rep = validate_structure(s);
        CHECK(rep.finiteness.pass);
        CHECK(rep.diagonal_relators.size() == 1);
    }
}

TEST_CASE("degeneration sequence counts follow n!") {
    // chain with k points: source (c0, c_{k-1}), target the consecutive pairs
    const std::vector<long> expected = {1, 2, 6, 24, 120};
    for (int n = 1; n <= 5; ++n) {
        int k = n + 2;
        auto ps = morse_structure(chain_points(k));
        std::string src = PairStructure::pair_label("c0", "c" + std::to_string(k - 1));
        std::vector<std::string> target;
        for (int i = 0; i + 1 < k; ++i)
            target.push_back(
                PairStructure::pair_label("c" + std::to_string(i), "c" + std::to_string(i + 1)));
        auto seqs = enumerate_sequences(ps.structure, src, target);
        CHECK(static_cast<long>(seqs.size()) == expected[n - 1]);
        for (const auto& q : seqs) {
            CHECK(q.tuples.front().size() == 1);
            CHECK(q.tuples.back().size() == target.size());
        }
    }

    SUBCASE("unreachable target gives the empty list") {
        auto ps = morse_structure(chain_points(4));
        auto seqs = enumerate_sequences(
            ps.structure, PairStructure::pair_label("c0", "c1"),
            {PairStructure::pair_label("c1", "c2"), PairStructure::pair_label("c2", "c3")});
        CHECK(seqs.empty());
    }

    SUBCASE("single step: 3-point chain has exactly one sequence") {
        auto ps = morse_structure(chain_points(3));
        auto seqs = enumerate_sequences(
            ps.structure, PairStructure::pair_label("c0", "c2"),
            {PairStructure::pair_label("c0", "c1"), PairStructure::pair_label("c1", "c2")});
        CHECK(seqs.size() == 1);
    }
}

TEST_CASE("composition raises the degeneracy by one and is associative") {
    auto ps = morse_structure(chain_points(4));
    OperationTable table{ps.structure};
    auto lbl = [](int i, int j) {
        return PairStructure::pair_label("c" + std::to_string(i), "c" + std::to_string(j));
    };
    Element u01 = Element::prime("u01", lbl(0, 1));
    Element u12 = Element::prime("u12", lbl(1, 2));
    Element u23 = Element::prime("u23", lbl(2, 3));

    auto x = compose(table, {lbl(0, 1), lbl(1, 2), lbl(0, 2)}, u01, u12);
    CHECK(x.degeneracy() == 1);
    CHECK(x.membership == lbl(0, 2));
    CHECK(spectrum(x).sources == std::vector<std::string>{lbl(0, 1), lbl(1, 2)});
    CHECK(spectrum(x).target == lbl(0, 2));

    auto left = compose(table, {lbl(0, 2), lbl(2, 3), lbl(0, 3)}, x, u23);
    auto right = compose(table, {lbl(0, 1), lbl(1, 3), lbl(0, 3)}, u01,
                         compose(table, {lbl(1, 2), lbl(2, 3), lbl(1, 3)}, u12, u23));
    CHECK(left == right);
    CHECK(left.degeneracy() == 2);

    CHECK_THROWS_AS(compose(table, {lbl(0, 1), lbl(1, 2), lbl(0, 2)}, u01, u23), DomainError);
    CHECK_THROWS_AS(compose(table, {lbl(0, 1), lbl(2, 3), lbl(0, 3)}, u01, u23), DomainError);
}

TEST_CASE("master equation holds for full sets and fails under deletions") {
    auto ps = morse_structure(chain_points(3));
    OperationTable table{ps.structure};
    auto lbl = [](int i, int j) {
        return PairStructure::pair_label("c" + std::to_string(i), "c" + std::to_string(j));
    };
    Element u01 = Element::prime("u01", lbl(0, 1));
    Element u12 = Element::prime("u12", lbl(1, 2));
    Element broken = compose(table, {lbl(0, 1), lbl(1, 2), lbl(0, 2)}, u01, u12);

    std::vector<Element> K = {u01, u12, broken};
    CHECK(master_equation_check(table, K).pass);

    for (size_t drop = 0; drop < K.size(); ++drop) {
        std::vector<Element> K2;
        for (size_t i = 0; i < K.size(); ++i)
            if (i != drop) K2.push_back(K[i]);
        auto rep = master_equation_check(table, K2);
        CHECK_FALSE(rep.pass);
        CHECK(rep.boundary_not_composed.size() + rep.composed_not_boundary.size() >= 1);
    }

    SUBCASE("no boundary elements and no composable pairs passes vacuously") {
        std::vector<Element> K3 = {u01};
        CHECK(master_equation_check(table, K3).pass);
    }
}

TEST_CASE("degeneracy and face memberships") {
    auto ps = morse_structure(chain_points(5));
    OperationTable table{ps.structure};
    auto lbl = [](int i, int j) {
        return PairStructure::pair_label("c" + std::to_string(i), "c" + std::to_string(j));
    };
    Element u01 = Element::prime("u01", lbl(0, 1));

    SUBCASE("an unbroken trajectory has no faces") {
        auto rep = degeneracy_and_faces(ps.structure, u01);
        CHECK(rep.degeneracy == 0);
        CHECK(rep.faces.empty());
    }

    SUBCASE("a k-broken chain belongs to k - 1 faces") {
        Element x = u01;
        for (int j = 1; j <= 3; ++j) {
            Element next = Element::prime("u" + std::to_string(j) + std::to_string(j + 1),
                                          lbl(j, j + 1));
            x = compose(table, {lbl(0, j), lbl(j, j + 1), lbl(0, j + 1)}, x, next);
            auto rep = degeneracy_and_faces(ps.structure, x);
            CHECK(rep.degeneracy == j);
            CHECK(static_cast<int>(rep.faces.size()) == j);
        }
    }
}

TEST_CASE("ties in values are allowed by the partial-order variant") {
    auto ps = value_order_structure({{"m1", 0.0}, {"m2", 0.0}, {"s", 1.0}});
    CHECK(ps.structure.labels.size() == 2);  // (m1,s), (m2,s)
    CHECK(ps.structure.relators.empty());
    CHECK(validate_structure(ps.structure).all_pass());
}

TEST_CASE("json round trip") {
    auto ps = morse_structure(chain_points(4));
    auto j = to_json(ps.structure);
    auto back = structure_from_json(j);
    CHECK(back == ps.structure);
    CHECK(j["S"].size() == 6);
    CHECK(j["R"].size() == 4);
}
