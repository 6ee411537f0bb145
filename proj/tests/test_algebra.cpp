#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "scfred/algebra.hpp"
#include "scfred/errors.hpp"

using namespace scfred;
using namespace scfred::algebra;
using degen::PairStructure;

namespace {

std::vector<std::pair<std::string, double>> chain_points(int n) {
    std::vector<std::pair<std::string, double>> pts;
    for (int i = 0; i < n; ++i) pts.emplace_back("c" + std::to_string(i), static_cast<double>(i));
    return pts;
}

std::string lbl(int i, int j) {
    return PairStructure::pair_label("c" + std::to_string(i), "c" + std::to_string(j));
}

/// Pair parity = parity of the index gap along the chain (consecutive pairs
/// odd, and in general (i,j) has parity j - i mod 2).
void chain_parities(const PairStructure& ps, CountingFunction& f) {
    for (size_t k = 0; k < ps.pair_endpoints.size(); ++k) {
        auto [a, b] = ps.pair_endpoints[k];
        f.set_parity(ps.structure.labels[k], (b - a) % 2);
    }
}

// Test-local F2 elimination, independent of the library path.
int oracle_rank_f2(std::vector<std::vector<int>> rows) {
    size_t rank = 0;
    size_t cols = rows.empty() ? 0 : rows[0].size();
    for (size_t c = 0; c < cols && rank < rows.size(); ++c) {
        size_t pivot = rank;
        while (pivot < rows.size() && rows[pivot][c] % 2 == 0) ++pivot;
        if (pivot == rows.size()) continue;
        std::swap(rows[pivot], rows[rank]);
        for (size_t r = 0; r < rows.size(); ++r)
            if (r != rank && rows[r][c] % 2 != 0)
                for (size_t k = 0; k < cols; ++k) rows[r][k] = (rows[r][k] + rows[rank][k]) % 2;
        ++rank;
    }
    return static_cast<int>(rank);
}

}  // namespace

TEST_CASE("convolution basics and associativity") {
    auto ps = degen::morse_structure(chain_points(3));

    SUBCASE("zero annihilates") {
        auto zero = CountingFunction::zeros(ps.structure, Ring::Z2);
        auto beta = CountingFunction::zeros(ps.structure, Ring::Z2);
        beta.set(lbl(0, 1), 1);
        CHECK(convolve(zero, beta).is_zero());
    }

    SUBCASE("single relator evaluates the displayed sum") {
        auto alpha = CountingFunction::zeros(ps.structure, Ring::Z2);
        for (const auto& l : ps.structure.labels) alpha.set(l, 1);
        auto prod = convolve(alpha, alpha);
        CHECK(prod.value(lbl(0, 2)) == 1);
        CHECK(prod.value(lbl(0, 1)) == 0);
        CHECK(prod.value(lbl(1, 2)) == 0);
    }

    SUBCASE("associativity on random functions over the 5-point structure") {
        auto ps5 = degen::morse_structure(chain_points(5));
        std::mt19937_64 rng(2024);
        std::uniform_int_distribution<int> coin(0, 4);
        for (Ring ring : {Ring::Z2, Ring::Z}) {
            for (int trial = 0; trial < 1000; ++trial) {
                auto a = CountingFunction::zeros(ps5.structure, ring);
                auto b = CountingFunction::zeros(ps5.structure, ring);
                auto c = CountingFunction::zeros(ps5.structure, ring);
                for (const auto& l : ps5.structure.labels) {
                    a.set(l, coin(rng) - 2);
                    b.set(l, coin(rng) - 2);
                    c.set(l, coin(rng) - 2);
                }
                auto left = convolve(convolve(a, b), c);
                auto right = convolve(a, convolve(b, c));
                CHECK(left.values == right.values);
            }
        }
    }

    SUBCASE("structure mismatch is rejected") {
        auto other = degen::morse_structure(chain_points(4));
        auto a = CountingFunction::zeros(ps.structure, Ring::Z2);
        auto b = CountingFunction::zeros(other.structure, Ring::Z2);
        CHECK_THROWS_AS(convolve(a, b), StructureMismatchError);
    }
}

TEST_CASE("graded commutator") {
    auto ps = degen::morse_structure(chain_points(4));

    SUBCASE("[Q, Q] = 2 Q*Q over the integers for odd Q") {
        auto Q = CountingFunction::zeros(ps.structure, Ring::Z);
        chain_parities(ps, Q);
        Q.set(lbl(0, 1), 1);
        Q.set(lbl(1, 2), 1);
        Q.set(lbl(2, 3), 1);
        auto comm = graded_commutator(Q, Q);
        auto qq = convolve(Q, Q);
        for (size_t i = 0; i < comm.values.size(); ++i)
            CHECK(comm.values[i] == 2 * qq.values[i]);
    }

    SUBCASE("commutator with zero vanishes") {
        auto Q = CountingFunction::zeros(ps.structure, Ring::Z);
        chain_parities(ps, Q);
        Q.set(lbl(0, 1), 3);
        auto zero = CountingFunction::zeros(ps.structure, Ring::Z);
        zero.parity = Q.parity;
        CHECK(graded_commutator(Q, zero).is_zero());
    }

    SUBCASE("even inputs give the difference") {
        auto a = CountingFunction::zeros(ps.structure, Ring::Z);
        auto b = CountingFunction::zeros(ps.structure, Ring::Z);
        chain_parities(ps, a);
        chain_parities(ps, b);
        a.set(lbl(0, 2), 2);  // gap 2: even
        b.set(lbl(1, 3), 3);
        auto comm = graded_commutator(a, b);
        auto ab = convolve(a, b);
        auto ba = convolve(b, a);
        for (size_t i = 0; i < comm.values.size(); ++i)
            CHECK(comm.values[i] == ab.values[i] - ba.values[i]);
    }

    SUBCASE("inhomogeneous input is rejected") {
        auto a = CountingFunction::zeros(ps.structure, Ring::Z);
        chain_parities(ps, a);
        a.set(lbl(0, 1), 1);  // odd
        a.set(lbl(0, 2), 1);  // even
        CHECK_THROWS_AS(graded_commutator(a, a), GradingError);
    }
}

TEST_CASE("D_Q operator") {
    SUBCASE("zero counting function gives the zero differential and full homology") {
        auto ps = degen::morse_structure(chain_points(4));
        auto Q = CountingFunction::zeros(ps.structure, Ring::Z2);
        chain_parities(ps, Q);
        auto dq = dq_operator(Q);
        CHECK(dq.matrix.cwiseAbs().maxCoeff() == 0.0);
        CHECK(dq.squares_to_zero);
        auto h = dq_homology(dq, Q.parity);
        CHECK(h.total == static_cast<int>(ps.structure.labels.size()));
    }

    SUBCASE("the height-function datum: one even generator, Q = 0, homology 1") {
        degen::DegenerationStructure s;
        s.labels = {"*"};
        auto Q = CountingFunction::zeros(s, Ring::Z2);
        auto dq = dq_operator(Q);
        CHECK(dq.matrix.cwiseAbs().maxCoeff() == 0.0);
        auto h = dq_homology(dq, Q.parity);
        CHECK(h.total == 1);
        CHECK(h.even == 1);
        CHECK(h.odd == 0);
    }

    SUBCASE("a Q with nonvanishing square is rejected with a witness") {
        auto ps = degen::morse_structure(chain_points(3));
        auto Q = CountingFunction::zeros(ps.structure, Ring::Z2);
        chain_parities(ps, Q);
        Q.set(lbl(0, 1), 1);
        Q.set(lbl(1, 2), 1);
        CHECK_THROWS_AS(dq_operator(Q), NotADifferentialError);
        try {
            dq_operator(Q);
        } catch (const NotADifferentialError& e) {
            CHECK(e.witness() == lbl(0, 2));
        }
    }

    SUBCASE("chain-cancellation Q squares to zero and D_Q^2 = 0") {
        // four points ordered A < B < B' < C with both channels counted
        auto ps = degen::value_order_structure(
            {{"A", -1.0}, {"B", -1.0 / 3.0}, {"Bp", 1.0 / 3.0}, {"C", 1.0}});
        auto Q = CountingFunction::zeros(ps.structure, Ring::Z2);
        // Morse indices: A:0, B:1, Bp:1, C:2
        std::vector<int> idx = {0, 1, 1, 2};
        for (size_t k = 0; k < ps.pair_endpoints.size(); ++k) {
            auto [a, b] = ps.pair_endpoints[k];
            Q.set_parity(ps.structure.labels[k], (idx[b] - idx[a]) % 2);
        }
        Q.set(PairStructure::pair_label("A", "B"), 1);
        Q.set(PairStructure::pair_label("A", "Bp"), 1);
        Q.set(PairStructure::pair_label("B", "C"), 1);
        Q.set(PairStructure::pair_label("Bp", "C"), 1);
        CHECK(convolve(Q, Q).is_zero());
        auto dq = dq_operator(Q);
        CHECK(dq.squares_to_zero);
    }
}

TEST_CASE("F2 homology") {
    SUBCASE("zero boundary keeps every generator") {
        ChainComplexF2 c;
        c.basis = {"x", "y", "z"};
        c.grading = {0, 0, 1};
        c.boundary = MatrixXi::Zero(3, 3);
        c = verify_complex(std::move(c));
        auto betti = homology_f2(c);
        CHECK(betti == std::vector<int>{2, 1});
    }

    SUBCASE("a saddle hitting two minima") {
        ChainComplexF2 c;
        c.basis = {"m1", "m2", "s"};
        c.grading = {0, 0, 1};
        c.boundary = MatrixXi::Zero(3, 3);
        c.boundary(0, 2) = 1;
        c.boundary(1, 2) = 1;
        c = verify_complex(std::move(c));
        auto betti = homology_f2(c);
        CHECK(betti == std::vector<int>{1, 0});
    }

    SUBCASE("unverified complexes are rejected") {
        ChainComplexF2 c;
        c.basis = {"x"};
        c.grading = {0};
        c.boundary = MatrixXi::Zero(1, 1);
        CHECK_THROWS_AS(homology_f2(c), MustVerifyFirstError);
    }

    SUBCASE("betti numbers are invariant under basis permutation") {
        ChainComplexF2 c;
        c.basis = {"n", "s", "M1", "M2"};
        c.grading = {0, 1, 2, 2};
        c.boundary = MatrixXi::Zero(4, 4);
        c.boundary(1, 2) = 1;
        c.boundary(1, 3) = 1;
        c = verify_complex(std::move(c));
        auto betti = homology_f2(c);

        std::vector<int> perm = {2, 0, 3, 1};
        ChainComplexF2 p;
        p.basis.resize(4);
        p.grading.resize(4);
        p.boundary = MatrixXi::Zero(4, 4);
        for (int i = 0; i < 4; ++i) {
            p.basis[perm[i]] = c.basis[i];
            p.grading[perm[i]] = c.grading[i];
        }
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) p.boundary(perm[i], perm[j]) = c.boundary(i, j);
        p = verify_complex(std::move(p));
        CHECK(homology_f2(p) == betti);
    }
}

TEST_CASE("representation complexes match independent oracles") {
    SUBCASE("double well on the plane: Betti (1, 0)") {
        auto ps = degen::value_order_structure({{"m1", 0.0}, {"m2", 0.0}, {"s", 0.25}});
        auto Q = CountingFunction::zeros(ps.structure, Ring::Z2);
        Q.set(PairStructure::pair_label("m1", "s"), 1);
        Q.set(PairStructure::pair_label("m2", "s"), 1);
        auto complex = representation_complex(ps, Q, {0, 0, 1});
        auto betti = homology_f2(complex);
        CHECK(betti == std::vector<int>{1, 0});

        // rank oracle on the same boundary
        CHECK(oracle_rank_f2({{1}, {1}}) == 1);
    }

    SUBCASE("no critical pairs: boundary zero, Betti equals generator counts") {
        auto ps = degen::value_order_structure({{"a", 0.0}, {"b", 1.0}});
        auto Q = CountingFunction::zeros(ps.structure, Ring::Z2);
        auto complex = representation_complex(ps, Q, {0, 2});
        auto betti = homology_f2(complex);
        CHECK(betti == std::vector<int>{1, 0, 1});
    }

    SUBCASE("four-point sphere datum matches the simplicial octahedron") {
        auto ps = degen::value_order_structure(
            {{"n", 0.0}, {"s", 1.0}, {"M1", 2.0}, {"M2", 2.5}});
        auto Q = CountingFunction::zeros(ps.structure, Ring::Z2);
        // two flow lines from the minimum to the saddle cancel mod 2;
        // each maximum hits the saddle once
        Q.set(PairStructure::pair_label("s", "M1"), 1);
        Q.set(PairStructure::pair_label("s", "M2"), 1);
        auto complex = representation_complex(ps, Q, {0, 1, 2, 2});
        auto betti = homology_f2(complex);
        CHECK(betti == std::vector<int>{1, 0, 1});

        // Simplicial oracle: boundary matrices of the octahedron over F2.
        // vertices 0..5 (0 top, 5 bottom, 1-4 equator)
        std::vector<std::array<int, 2>> edges;
        std::vector<std::array<int, 3>> faces;
        for (int k = 0; k < 4; ++k) {
            int a = 1 + k, b = 1 + (k + 1) % 4;
            edges.push_back({0, a});
            edges.push_back({5, a});
            edges.push_back({a, b});
            faces.push_back({0, a, b});
            faces.push_back({5, a, b});
        }
        std::vector<std::vector<int>> d1(edges.size(), std::vector<int>(6, 0));
        for (size_t e = 0; e < edges.size(); ++e) {
            d1[e][edges[e][0]] = 1;
            d1[e][edges[e][1]] = 1;
        }
        auto edge_index = [&](int a, int b) {
            for (size_t e = 0; e < edges.size(); ++e)
                if ((edges[e][0] == a && edges[e][1] == b) ||
                    (edges[e][0] == b && edges[e][1] == a))
                    return static_cast<int>(e);
            return -1;
        };
        std::vector<std::vector<int>> d2(faces.size(), std::vector<int>(edges.size(), 0));
        for (size_t f = 0; f < faces.size(); ++f) {
            auto [a, b, cix] = faces[f];
            d2[f][edge_index(a, b)] = 1;
            d2[f][edge_index(b, cix)] = 1;
            d2[f][edge_index(a, cix)] = 1;
        }
        int r1 = oracle_rank_f2(d1);  // rank of d: C1 -> C0
        int r2 = oracle_rank_f2(d2);  // rank of d: C2 -> C1
        int b0 = 6 - r1;
        int b1 = static_cast<int>(edges.size()) - r1 - r2;
        int b2 = static_cast<int>(faces.size()) - r2;
        CHECK(b0 == betti[0]);
        CHECK(b1 == betti[1]);
        CHECK(b2 == betti[2]);
    }

    SUBCASE("support outside index difference one is rejected") {
        auto ps = degen::value_order_structure({{"a", 0.0}, {"b", 1.0}});
        auto Q = CountingFunction::zeros(ps.structure, Ring::Z2);
        Q.set(PairStructure::pair_label("a", "b"), 1);
        CHECK_THROWS_AS(representation_complex(ps, Q, {0, 2}), PreconditionError);
    }
}
