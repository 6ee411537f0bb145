#pragma once

#include <map>
#include <string>
#include <vector>

#include "scfred/degen.hpp"

namespace scfred::sftsym {

/// A periodic-orbit symbol: covering number, parity of the grading, and the
/// troublesome flag (odd count of eigenvalues in (-1, 0) of the linearized
/// return map). Troublesome orbits with even covering are excluded from the
/// indexing set.
struct Orbit {
    std::string name;
    int covering = 1;
    bool odd = false;
    bool troublesome = false;
};

class OrbitSymbolTable {
public:
    void add(const Orbit& orbit);
    const Orbit& lookup(const std::string& name) const;
    bool has(const std::string& name) const;

private:
    std::map<std::string, Orbit> orbits_;
};

struct Letter {
    enum class Kind { Q, P };
    Kind kind;
    std::string orbit;
    bool operator==(const Letter&) const = default;
};

/// A raw word hbar^g1 * letters, not necessarily ordered. The hbar exponent
/// is the g - 1 bookkeeping and may be -1.
struct SymbolWord {
    int hbar = 0;
    std::vector<Letter> letters;

    static SymbolWord q(const std::string& orbit, int power = 1);
    static SymbolWord p(const std::string& orbit, int power = 1);
    static SymbolWord hbar_power(int k);
    SymbolWord operator*(const SymbolWord& other) const;  // concatenation
};

/// Canonical standard form: all q letters before all p letters, each block
/// sorted by orbit name, with powers collected.
struct StandardWord {
    int hbar = 0;
    std::vector<std::pair<std::string, int>> q_part;
    std::vector<std::pair<std::string, int>> p_part;

    bool operator<(const StandardWord& other) const {
        return std::tie(hbar, q_part, p_part) <
               std::tie(other.hbar, other.q_part, other.p_part);
    }
    bool operator==(const StandardWord& other) const = default;
};

/// Finite integer combination of standard words; zero coefficients are
/// never stored.
class FormalSum {
public:
    FormalSum() = default;
    explicit FormalSum(std::map<StandardWord, long long> terms) : terms_(std::move(terms)) {
        prune();
    }

    const std::map<StandardWord, long long>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }
    void add(const StandardWord& w, long long coef);
    FormalSum operator+(const FormalSum& other) const;
    FormalSum operator*(long long scale) const;
    bool operator==(const FormalSum& other) const { return terms_ == other.terms_; }

private:
    void prune();
    std::map<StandardWord, long long> terms_;
};

/// Parity of a word: sum of its letter parities mod 2 (hbar is even).
int word_parity(const OrbitSymbolTable& table, const SymbolWord& word);

/// Rewrites to standard form using the super-commutation rules and
/// p_g q_g = (sign) q_g p_g + kappa_g hbar. `randomize_seed`, when nonzero,
/// picks rewrite positions at random instead of leftmost-first; the result
/// must not depend on it.
FormalSum normalize(const OrbitSymbolTable& table, const SymbolWord& word,
                    unsigned randomize_seed = 0);

/// Bilinear extension of concatenation followed by normalization.
FormalSum multiply(const OrbitSymbolTable& table, const FormalSum& a, const FormalSum& b);

FormalSum word_sum(const OrbitSymbolTable& table, const SymbolWord& word);

std::string to_string(const StandardWord& word);
std::string to_string(const FormalSum& sum);

SymbolWord raw_from_standard(const StandardWord& word);

struct InducedStructure {
    degen::DegenerationStructure structure;
    degen::ValidationReport report;
};

/// S = the given standard classes, R = all triples with a nonzero
/// coefficient in the product. Troublesome orbits are rejected.
InducedStructure induced_degeneration_structure(const OrbitSymbolTable& table,
                                                const std::vector<StandardWord>& classes);

}  // namespace scfred::sftsym
