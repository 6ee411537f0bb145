#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace scfred::degen {

/// Finite set with relator triples (A, B; C): A the left source, B the right
/// source, C the target.
struct DegenerationStructure {
    std::vector<std::string> labels;
    std::vector<std::array<int, 3>> relators;  // indices into labels

    int index_of(const std::string& label) const;
    bool has_relator(int a, int b, int c) const;
    std::vector<std::array<int, 3>> relators_with_target(int c) const;
    bool decomposable(int label) const;
    bool operator==(const DegenerationStructure& other) const = default;

    static DegenerationStructure from_labels(std::vector<std::string> labels,
                                             std::vector<std::array<std::string, 3>> relators);
};

nlohmann::ordered_json to_json(const DegenerationStructure& s);
DegenerationStructure structure_from_json(const nlohmann::json& j);

struct AxiomResult {
    bool pass = true;
    std::vector<std::string> witnesses;
};

struct ValidationReport {
    AxiomResult finiteness;
    AxiomResult associativity;
    AxiomResult minimality;
    AxiomResult source_target_distinct;  // (A,B;C) in R implies A != C, B != C
    std::vector<std::string> diagonal_relators;  // flagged, not failed
    bool all_pass() const {
        return finiteness.pass && associativity.pass && minimality.pass &&
               source_target_distinct.pass;
    }
};

nlohmann::ordered_json to_json(const ValidationReport& r);

/// Checks Degeneration Finiteness (as acyclicity of the replacement digraph,
/// the equivalent form on finite sets), Associativity (every nonempty family
/// of short degeneration sequences with fixed source and target has exactly
/// the two dual members) and Minimality. Failures carry witnesses.
ValidationReport validate_structure(const DegenerationStructure& s);

/// One degeneration sequence (Z) = z_0 -> z_1 -> ... -> z_n, each step
/// replacing one element C by (A, B) for a relator (A, B; C).
struct DegenerationSequence {
    std::vector<std::vector<int>> tuples;
    struct Step {
        int position;
        std::array<int, 3> relator;
    };
    std::vector<Step> steps;
};

/// All sequences from the one-element tuple (Z) to the target tuple. An
/// unreachable target gives an empty list.
std::vector<DegenerationSequence> enumerate_sequences(const DegenerationStructure& s,
                                                      const std::string& source,
                                                      const std::vector<std::string>& target);

/// Morse-style structure: S = ordered pairs of critical labels with strictly
/// increasing value, R = all triples ((a,b),(b,c);(a,c)).
struct PairStructure {
    DegenerationStructure structure;
    std::vector<std::string> point_labels;  // ordered by value
    std::vector<double> point_values;
    std::vector<std::pair<int, int>> pair_endpoints;  // per structure label

    int pair_index(int a, int b) const;  // -1 if absent
    static std::string pair_label(const std::string& a, const std::string& b);
};

/// Throws TotalOrderViolationError when two values coincide within tol.
PairStructure morse_structure(const std::vector<std::pair<std::string, double>>& points,
                              double tol = 1e-9);

/// Partial-order variant: ties are allowed and simply produce no pair, so
/// problems with coinciding critical values (for example two minima of a
/// symmetric double well) still index correctly.
PairStructure value_order_structure(const std::vector<std::pair<std::string, double>>& points,
                                    double tol = 1e-9);

/// Element of a space indexed by a degeneration structure, encoded by its
/// membership label and its prime decomposition.
struct Element {
    std::string membership;
    std::vector<std::string> prime_ids;
    std::vector<std::string> prime_memberships;

    int degeneracy() const { return static_cast<int>(prime_ids.size()) - 1; }
    std::string id() const;
    bool operator==(const Element& other) const {
        return membership == other.membership && prime_ids == other.prime_ids;
    }
    bool operator<(const Element& other) const {
        return std::tie(membership, prime_ids) < std::tie(other.membership, other.prime_ids);
    }

    static Element prime(std::string id, std::string membership);
};

/// The operation attached to a structure: composition along relators,
/// raising the degeneracy by one.
struct OperationTable {
    DegenerationStructure structure;
};

/// a o_{(A,B;C)} b. Throws DomainError when memberships do not match the
/// relator or the relator is absent.
Element compose(const OperationTable& table, const std::array<std::string, 3>& relator,
                const Element& a, const Element& b);

struct MasterEquationReport {
    bool pass = false;
    std::vector<std::string> boundary_not_composed;  // in dK but not K o K
    std::vector<std::string> composed_not_boundary;  // in K o K but not dK
};

/// Compares dK = {x in K : d(x) >= 1} with K o K = {a o_C b}.
MasterEquationReport master_equation_check(const OperationTable& table,
                                           const std::vector<Element>& K);

struct FaceReport {
    int degeneracy = 0;
    std::vector<std::array<std::string, 3>> faces;  // [A, B; C] per split position
};

/// Degeneracy from the prime decomposition and the face relator of every
/// one-step splitting whose chunk memberships compose uniquely.
FaceReport degeneracy_and_faces(const DegenerationStructure& s, const Element& x);

/// The spectrum (A_0, ..., A_d; Z) of an element.
struct GeneralizedRelator {
    std::vector<std::string> sources;
    std::string target;
    bool operator==(const GeneralizedRelator& other) const = default;
};

GeneralizedRelator spectrum(const Element& x);

}  // namespace scfred::degen
