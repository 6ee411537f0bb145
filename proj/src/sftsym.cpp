#include "scfred/sftsym.hpp"

#include <algorithm>
#include <random>

#include "scfred/errors.hpp"

namespace scfred::sftsym {

void OrbitSymbolTable::add(const Orbit& orbit) {
    if (orbit.covering < 1) throw TableError("covering number must be a positive integer");
    if (orbit.troublesome && orbit.covering % 2 == 0)
        throw TableError("troublesome orbit '" + orbit.name +
                         "' with even covering is excluded from the indexing set");
    orbits_[orbit.name] = orbit;
}

const Orbit& OrbitSymbolTable::lookup(const std::string& name) const {
    auto it = orbits_.find(name);
    if (it == orbits_.end()) throw TableError("unknown orbit '" + name + "'");
    return it->second;
}

bool OrbitSymbolTable::has(const std::string& name) const { return orbits_.count(name) > 0; }

SymbolWord SymbolWord::q(const std::string& orbit, int power) {
    SymbolWord w;
    for (int i = 0; i < power; ++i) w.letters.push_back({Letter::Kind::Q, orbit});
    return w;
}

SymbolWord SymbolWord::p(const std::string& orbit, int power) {
    SymbolWord w;
    for (int i = 0; i < power; ++i) w.letters.push_back({Letter::Kind::P, orbit});
    return w;
}

SymbolWord SymbolWord::hbar_power(int k) {
    SymbolWord w;
    w.hbar = k;
    return w;
}

SymbolWord SymbolWord::operator*(const SymbolWord& other) const {
    SymbolWord out;
    out.hbar = hbar + other.hbar;
    out.letters = letters;
    out.letters.insert(out.letters.end(), other.letters.begin(), other.letters.end());
    return out;
}

void FormalSum::add(const StandardWord& w, long long coef) {
    if (coef == 0) return;
    auto [it, inserted] = terms_.emplace(w, coef);
    if (!inserted) {
        it->second += coef;
        if (it->second == 0) terms_.erase(it);
    }
}

FormalSum FormalSum::operator+(const FormalSum& other) const {
    FormalSum out = *this;
    for (const auto& [w, c] : other.terms_) out.add(w, c);
    return out;
}

FormalSum FormalSum::operator*(long long scale) const {
    FormalSum out;
    if (scale == 0) return out;
    for (const auto& [w, c] : terms_) out.terms_[w] = c * scale;
    return out;
}

void FormalSum::prune() {
    for (auto it = terms_.begin(); it != terms_.end();)
        it = it->second == 0 ? terms_.erase(it) : std::next(it);
}

int word_parity(const OrbitSymbolTable& table, const SymbolWord& word) {
    int p = 0;
    for (const auto& l : word.letters)
        if (table.lookup(l.orbit).odd) p ^= 1;
    return p;
}

namespace {

struct WorkItem {
    long long coef;
    int hbar;
    std::vector<Letter> letters;
};

bool letter_odd(const OrbitSymbolTable& table, const Letter& l) {
    return table.lookup(l.orbit).odd;
}

/// Collects a descent-free word (q block then p block) into canonical order.
/// Repeated odd letters square to zero and kill the monomial.
bool canonicalize_blocks(const OrbitSymbolTable& table, const std::vector<Letter>& letters,
                         int hbar, long long& sign, StandardWord& out) {
    size_t split = 0;
    while (split < letters.size() && letters[split].kind == Letter::Kind::Q) ++split;
    std::vector<Letter> qs(letters.begin(), letters.begin() + split);
    std::vector<Letter> ps(letters.begin() + split, letters.end());

    auto sort_block = [&](std::vector<Letter>& block) -> bool {
        // adjacent-transposition sort; each odd-odd swap flips the sign
        for (size_t i = 0; i + 1 < block.size(); ++i)
            for (size_t j = 0; j + 1 < block.size() - i; ++j)
                if (block[j + 1].orbit < block[j].orbit) {
                    if (letter_odd(table, block[j]) && letter_odd(table, block[j + 1])) sign = -sign;
                    std::swap(block[j], block[j + 1]);
                }
        for (size_t i = 0; i + 1 < block.size(); ++i)
            if (block[i].orbit == block[i + 1].orbit && letter_odd(table, block[i]))
                return false;  // odd square vanishes
        return true;
    };
    if (!sort_block(qs) || !sort_block(ps)) return false;

    auto collect = [](const std::vector<Letter>& block) {
        std::vector<std::pair<std::string, int>> powers;
        for (const auto& l : block) {
            if (!powers.empty() && powers.back().first == l.orbit)
                ++powers.back().second;
            else
                powers.emplace_back(l.orbit, 1);
        }
        return powers;
    };
    out.hbar = hbar;
    out.q_part = collect(qs);
    out.p_part = collect(ps);
    return true;
}

}  // namespace

FormalSum normalize(const OrbitSymbolTable& table, const SymbolWord& word,
                    unsigned randomize_seed) {
    for (const auto& l : word.letters) table.lookup(l.orbit);  // validate
    std::mt19937_64 rng(randomize_seed);
    FormalSum out;
    std::vector<WorkItem> stack;
    stack.push_back({1, word.hbar, word.letters});
    while (!stack.empty()) {
        WorkItem item = std::move(stack.back());
        stack.pop_back();
        // find the descents: p immediately before q
        std::vector<size_t> descents;
        for (size_t i = 0; i + 1 < item.letters.size(); ++i)
            if (item.letters[i].kind == Letter::Kind::P &&
                item.letters[i + 1].kind == Letter::Kind::Q)
                descents.push_back(i);
        if (descents.empty()) {
            long long sign = 1;
            StandardWord sw;
            if (canonicalize_blocks(table, item.letters, item.hbar, sign, sw))
                out.add(sw, item.coef * sign);
            continue;
        }
        size_t pick = descents.front();
        if (randomize_seed != 0)
            pick = descents[std::uniform_int_distribution<size_t>(0, descents.size() - 1)(rng)];
        const Letter pl = item.letters[pick];
        const Letter ql = item.letters[pick + 1];
        const bool both_odd = letter_odd(table, pl) && letter_odd(table, ql);
        // swapped term
        WorkItem swapped = item;
        std::swap(swapped.letters[pick], swapped.letters[pick + 1]);
        swapped.coef = item.coef * (both_odd ? -1 : 1);
        stack.push_back(std::move(swapped));
        // contraction for matching orbits: p q = (sign) q p + kappa hbar
        if (pl.orbit == ql.orbit) {
            WorkItem contracted;
            contracted.coef = item.coef * table.lookup(pl.orbit).covering;
            contracted.hbar = item.hbar + 1;
            contracted.letters.assign(item.letters.begin(), item.letters.begin() + pick);
            contracted.letters.insert(contracted.letters.end(), item.letters.begin() + pick + 2,
                                      item.letters.end());
            stack.push_back(std::move(contracted));
        }
    }
    return out;
}

SymbolWord raw_from_standard(const StandardWord& word) {
    SymbolWord raw;
    raw.hbar = word.hbar;
    for (const auto& [orbit, power] : word.q_part)
        for (int i = 0; i < power; ++i) raw.letters.push_back({Letter::Kind::Q, orbit});
    for (const auto& [orbit, power] : word.p_part)
        for (int i = 0; i < power; ++i) raw.letters.push_back({Letter::Kind::P, orbit});
    return raw;
}

FormalSum multiply(const OrbitSymbolTable& table, const FormalSum& a, const FormalSum& b) {
    FormalSum out;
    for (const auto& [wa, ca] : a.terms())
        for (const auto& [wb, cb] : b.terms()) {
            SymbolWord concat = raw_from_standard(wa) * raw_from_standard(wb);
            out = out + normalize(table, concat) * (ca * cb);
        }
    return out;
}

FormalSum word_sum(const OrbitSymbolTable& table, const SymbolWord& word) {
    return normalize(table, word);
}

std::string to_string(const StandardWord& word) {
    std::string s;
    if (word.hbar != 0) {
        s += "hbar";
        if (word.hbar != 1) s += "^" + std::to_string(word.hbar);
    }
    auto emit = [&s](const char* sym, const std::vector<std::pair<std::string, int>>& part) {
        for (const auto& [orbit, power] : part) {
            if (!s.empty()) s += " ";
            s += std::string(sym) + "_" + orbit;
            if (power != 1) s += "^" + std::to_string(power);
        }
    };
    emit("q", word.q_part);
    emit("p", word.p_part);
    if (s.empty()) s = "1";
    return s;
}

std::string to_string(const FormalSum& sum) {
    if (sum.empty()) return "0";
    std::string s;
    for (const auto& [w, c] : sum.terms()) {
        if (!s.empty()) s += " + ";
        if (c != 1) s += std::to_string(c) + " ";
        s += to_string(w);
    }
    return s;
}

InducedStructure induced_degeneration_structure(const OrbitSymbolTable& table,
                                                const std::vector<StandardWord>& classes) {
    for (const auto& w : classes) {
        auto check = [&](const std::vector<std::pair<std::string, int>>& part) {
            for (const auto& [orbit, power] : part) {
                (void)power;
                if (table.lookup(orbit).troublesome)
                    throw PreconditionError("orbit '" + orbit +
                                            "' is troublesome and cannot index the structure");
            }
        };
        check(w.q_part);
        check(w.p_part);
    }
    InducedStructure out;
    for (const auto& w : classes) out.structure.labels.push_back(to_string(w));
    std::map<StandardWord, int> index;
    for (size_t i = 0; i < classes.size(); ++i) index[classes[i]] = static_cast<int>(i);
    for (size_t i = 0; i < classes.size(); ++i)
        for (size_t j = 0; j < classes.size(); ++j) {
            FormalSum prod = multiply(table, FormalSum({{classes[i], 1}}),
                                      FormalSum({{classes[j], 1}}));
            for (const auto& [w, c] : prod.terms()) {
                (void)c;
                auto it = index.find(w);
                if (it != index.end())
                    out.structure.relators.push_back(
                        {static_cast<int>(i), static_cast<int>(j), it->second});
            }
        }
    out.report = degen::validate_structure(out.structure);
    return out;
}

}  // namespace scfred::sftsym
