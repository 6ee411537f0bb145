#include "scfred/degen.hpp"

#include <algorithm>
#include <set>

#include "scfred/errors.hpp"

namespace scfred::degen {

int DegenerationStructure::index_of(const std::string& label) const {
    for (size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == label) return static_cast<int>(i);
    return -1;
}

bool DegenerationStructure::has_relator(int a, int b, int c) const {
    for (const auto& r : relators)
        if (r[0] == a && r[1] == b && r[2] == c) return true;
    return false;
}

std::vector<std::array<int, 3>> DegenerationStructure::relators_with_target(int c) const {
    std::vector<std::array<int, 3>> out;
    for (const auto& r : relators)
        if (r[2] == c) out.push_back(r);
    return out;
}

bool DegenerationStructure::decomposable(int label) const {
    for (const auto& r : relators)
        if (r[2] == label) return true;
    return false;
}

DegenerationStructure DegenerationStructure::from_labels(
    std::vector<std::string> labels, std::vector<std::array<std::string, 3>> relators) {
    DegenerationStructure s;
    s.labels = std::move(labels);
    for (const auto& r : relators) {
        std::array<int, 3> idx;
        for (int i = 0; i < 3; ++i) {
            idx[i] = s.index_of(r[i]);
            if (idx[i] < 0) throw DomainError("relator uses unknown label '" + r[i] + "'");
        }
        s.relators.push_back(idx);
    }
    return s;
}

nlohmann::ordered_json to_json(const DegenerationStructure& s) {
    nlohmann::ordered_json j;
    j["S"] = s.labels;
    auto& R = j["R"] = nlohmann::ordered_json::array();
    for (const auto& r : s.relators)
        R.push_back({s.labels[r[0]], s.labels[r[1]], s.labels[r[2]]});
    return j;
}

DegenerationStructure structure_from_json(const nlohmann::json& j) {
    std::vector<std::string> labels = j.at("S").get<std::vector<std::string>>();
    std::vector<std::array<std::string, 3>> rel;
    for (const auto& r : j.at("R")) {
        if (r.size() != 3) throw DomainError("relators must be triples");
        rel.push_back({r[0].get<std::string>(), r[1].get<std::string>(), r[2].get<std::string>()});
    }
    return DegenerationStructure::from_labels(std::move(labels), std::move(rel));
}

nlohmann::ordered_json to_json(const ValidationReport& r) {
    nlohmann::ordered_json j;
    auto put = [&](const char* name, const AxiomResult& a) {
        j[name] = {{"pass", a.pass}, {"witnesses", a.witnesses}};
    };
    put("finiteness", r.finiteness);
    put("associativity", r.associativity);
    put("minimality", r.minimality);
    put("source_target_distinct", r.source_target_distinct);
    j["diagonal_relators"] = r.diagonal_relators;
    j["all_pass"] = r.all_pass();
    return j;
}

namespace {

// DFS cycle detection in the replacement digraph C -> A, C -> B.
bool find_cycle(const DegenerationStructure& s, int node, std::vector<int>& color,
                std::vector<int>& stack, std::vector<int>& cycle) {
    color[node] = 1;
    stack.push_back(node);
    for (const auto& r : s.relators) {
        if (r[2] != node) continue;
        for (int next : {r[0], r[1]}) {
            if (color[next] == 1) {
                auto it = std::find(stack.begin(), stack.end(), next);
                cycle.assign(it, stack.end());
                cycle.push_back(next);
                return true;
            }
            if (color[next] == 0 && find_cycle(s, next, color, stack, cycle)) return true;
        }
    }
    stack.pop_back();
    color[node] = 2;
    return false;
}

}  // namespace

ValidationReport validate_structure(const DegenerationStructure& s) {
    ValidationReport rep;
    const int n = static_cast<int>(s.labels.size());

    // Degeneration finiteness <=> no label reachable from itself through
    // replacements (finite S).
    std::vector<int> color(n, 0);
    for (int start = 0; start < n && rep.finiteness.pass; ++start) {
        if (color[start] != 0) continue;
        std::vector<int> stack, cycle;
        if (find_cycle(s, start, color, stack, cycle)) {
            rep.finiteness.pass = false;
            std::string w = "replacement cycle:";
            for (int v : cycle) w += " " + s.labels[v];
            rep.finiteness.witnesses.push_back(w);
        }
    }

    for (const auto& r : s.relators) {
        if (r[0] == r[2] || r[1] == r[2]) {
            rep.source_target_distinct.pass = false;
            rep.source_target_distinct.witnesses.push_back(
                "(" + s.labels[r[0]] + "," + s.labels[r[1]] + ";" + s.labels[r[2]] +
                ") repeats its target");
        }
        if (r[0] == r[1])
            rep.diagonal_relators.push_back("(" + s.labels[r[0]] + "," + s.labels[r[1]] + ";" +
                                            s.labels[r[2]] + ")");
    }

    // Associativity: group all short degeneration sequences by source and
    // target; each nonempty group must consist of exactly the two dual forms.
    struct Short {
        int step2_position;  // which element of the 2-tuple was expanded
        std::string describe(const DegenerationStructure& s, int z,
                             const std::array<int, 3>& first) const {
            return "(" + s.labels[z] + ") -> (" + s.labels[first[0]] + "," + s.labels[first[1]] +
                   ") -> ...";
        }
        std::array<int, 3> first;
    };
    std::map<std::pair<int, std::array<int, 3>>, std::vector<Short>> groups;
    for (const auto& r1 : s.relators) {
        // (Z) -> (A, B), then expand A or B
        for (const auto& r2 : s.relators) {
            if (r2[2] == r1[0])
                groups[{r1[2], {r2[0], r2[1], r1[1]}}].push_back(Short{0, r1});
            if (r2[2] == r1[1])
                groups[{r1[2], {r1[0], r2[0], r2[1]}}].push_back(Short{1, r1});
        }
    }
    for (const auto& [key, seqs] : groups) {
        bool ok = seqs.size() == 2 && seqs[0].step2_position + seqs[1].step2_position == 1;
        if (!ok) {
            rep.associativity.pass = false;
            rep.associativity.witnesses.push_back(
                "source " + s.labels[key.first] + " target (" + s.labels[key.second[0]] + "," +
                s.labels[key.second[1]] + "," + s.labels[key.second[2]] + ") has " +
                std::to_string(seqs.size()) + " short sequences");
        }
    }

    // Minimality.
    for (size_t i = 0; i < s.relators.size(); ++i)
        for (size_t j = i + 1; j < s.relators.size(); ++j) {
            const auto& a = s.relators[i];
            const auto& b = s.relators[j];
            if (a[2] != b[2]) continue;
            bool left = a[0] == b[0] && !s.decomposable(a[0]);
            bool right = a[1] == b[1] && !s.decomposable(a[1]);
            if ((left || right) && (a[0] != b[0] || a[1] != b[1])) {
                rep.minimality.pass = false;
                rep.minimality.witnesses.push_back(
                    "(" + s.labels[a[0]] + "," + s.labels[a[1]] + ";" + s.labels[a[2]] +
                    ") vs (" + s.labels[b[0]] + "," + s.labels[b[1]] + ";" + s.labels[b[2]] + ")");
            }
        }

    return rep;
}

namespace {

void enumerate_from(const DegenerationStructure& s, const std::vector<int>& current,
                    const std::vector<int>& target, DegenerationSequence& partial,
                    std::vector<DegenerationSequence>& out) {
    if (current.size() == target.size()) {
        if (current == target) out.push_back(partial);
        return;
    }
    if (current.size() > target.size()) return;
    for (size_t pos = 0; pos < current.size(); ++pos) {
        for (const auto& r : s.relators) {
            if (r[2] != current[pos]) continue;
            std::vector<int> next(current.begin(), current.begin() + pos);
            next.push_back(r[0]);
            next.push_back(r[1]);
            next.insert(next.end(), current.begin() + pos + 1, current.end());
            partial.tuples.push_back(next);
            partial.steps.push_back({static_cast<int>(pos), r});
            enumerate_from(s, next, target, partial, out);
            partial.tuples.pop_back();
            partial.steps.pop_back();
        }
    }
}

}  // namespace

std::vector<DegenerationSequence> enumerate_sequences(const DegenerationStructure& s,
                                                      const std::string& source,
                                                      const std::vector<std::string>& target) {
    int z = s.index_of(source);
    if (z < 0) throw DomainError("unknown source label '" + source + "'");
    std::vector<int> tgt;
    for (const auto& t : target) {
        int i = s.index_of(t);
        if (i < 0) throw DomainError("unknown target label '" + t + "'");
        tgt.push_back(i);
    }
    std::vector<DegenerationSequence> out;
    DegenerationSequence partial;
    partial.tuples.push_back({z});
    enumerate_from(s, {z}, tgt, partial, out);
    return out;
}

std::string PairStructure::pair_label(const std::string& a, const std::string& b) {
    return "(" + a + "," + b + ")";
}

int PairStructure::pair_index(int a, int b) const {
    for (size_t i = 0; i < pair_endpoints.size(); ++i)
        if (pair_endpoints[i].first == a && pair_endpoints[i].second == b)
            return static_cast<int>(i);
    return -1;
}

PairStructure value_order_structure(const std::vector<std::pair<std::string, double>>& points,
                                    double tol) {
    PairStructure ps;
    std::vector<std::pair<double, std::string>> sorted;
    for (const auto& [label, value] : points) sorted.emplace_back(value, label);
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [value, label] : sorted) {
        ps.point_labels.push_back(label);
        ps.point_values.push_back(value);
    }
    const int n = static_cast<int>(ps.point_labels.size());
    auto lt = [&](int a, int b) { return ps.point_values[b] - ps.point_values[a] > tol; };
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            if (!lt(a, b)) continue;
            ps.structure.labels.push_back(
                PairStructure::pair_label(ps.point_labels[a], ps.point_labels[b]));
            ps.pair_endpoints.emplace_back(a, b);
        }
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            for (int c = b + 1; c < n; ++c)
                if (lt(a, b) && lt(b, c))
                    ps.structure.relators.push_back({ps.pair_index(a, b), ps.pair_index(b, c),
                                                     ps.pair_index(a, c)});
    return ps;
}

PairStructure morse_structure(const std::vector<std::pair<std::string, double>>& points,
                              double tol) {
    std::vector<std::pair<double, std::string>> sorted;
    for (const auto& [label, value] : points) sorted.emplace_back(value, label);
    std::sort(sorted.begin(), sorted.end());
    for (size_t i = 0; i + 1 < sorted.size(); ++i)
        if (std::abs(sorted[i].first - sorted[i + 1].first) <= tol)
            throw TotalOrderViolationError("critical values " + sorted[i].second + " and " +
                                           sorted[i + 1].second + " coincide");
    return value_order_structure(points, tol);
}

std::string Element::id() const {
    std::string out;
    for (size_t i = 0; i < prime_ids.size(); ++i) {
        if (i) out += "*";
        out += prime_ids[i];
    }
    return out;
}

Element Element::prime(std::string id, std::string membership) {
    Element e;
    e.membership = membership;
    e.prime_ids = {std::move(id)};
    e.prime_memberships = {std::move(membership)};
    return e;
}

Element compose(const OperationTable& table, const std::array<std::string, 3>& relator,
                const Element& a, const Element& b) {
    const auto& s = table.structure;
    int A = s.index_of(relator[0]), B = s.index_of(relator[1]), C = s.index_of(relator[2]);
    if (A < 0 || B < 0 || C < 0) throw DomainError("relator uses unknown labels");
    if (!s.has_relator(A, B, C))
        throw DomainError("(" + relator[0] + "," + relator[1] + ";" + relator[2] +
                          ") is not a relator");
    if (a.membership != relator[0])
        throw DomainError("left factor lies in [" + a.membership + "], expected [" + relator[0] +
                          "]");
    if (b.membership != relator[1])
        throw DomainError("right factor lies in [" + b.membership + "], expected [" + relator[1] +
                          "]");
    Element out;
    out.membership = relator[2];
    out.prime_ids = a.prime_ids;
    out.prime_ids.insert(out.prime_ids.end(), b.prime_ids.begin(), b.prime_ids.end());
    out.prime_memberships = a.prime_memberships;
    out.prime_memberships.insert(out.prime_memberships.end(), b.prime_memberships.begin(),
                                 b.prime_memberships.end());
    return out;
}

MasterEquationReport master_equation_check(const OperationTable& table,
                                           const std::vector<Element>& K) {
    const auto& s = table.structure;
    std::set<Element> boundary;
    for (const auto& x : K)
        if (x.degeneracy() >= 1) boundary.insert(x);

    std::set<Element> composed;
    for (const auto& r : s.relators) {
        std::array<std::string, 3> rl = {s.labels[r[0]], s.labels[r[1]], s.labels[r[2]]};
        for (const auto& a : K) {
            if (a.membership != rl[0]) continue;
            for (const auto& b : K) {
                if (b.membership != rl[1]) continue;
                composed.insert(compose(table, rl, a, b));
            }
        }
    }

    MasterEquationReport rep;
    for (const auto& x : boundary)
        if (!composed.count(x)) rep.boundary_not_composed.push_back(x.id());
    for (const auto& x : composed)
        if (!boundary.count(x)) rep.composed_not_boundary.push_back(x.id());
    rep.pass = rep.boundary_not_composed.empty() && rep.composed_not_boundary.empty();
    return rep;
}

namespace {

/// Fold memberships left to right through the relator set; empty optional
/// when a composition is missing or ambiguous.
std::optional<int> fold_membership(const DegenerationStructure& s, const std::vector<int>& ms) {
    int acc = ms[0];
    for (size_t i = 1; i < ms.size(); ++i) {
        int found = -1;
        for (const auto& r : s.relators) {
            if (r[0] == acc && r[1] == ms[i]) {
                if (found >= 0 && found != r[2]) return std::nullopt;
                found = r[2];
            }
        }
        if (found < 0) return std::nullopt;
        acc = found;
    }
    return acc;
}

}  // namespace

FaceReport degeneracy_and_faces(const DegenerationStructure& s, const Element& x) {
    FaceReport rep;
    rep.degeneracy = x.degeneracy();
    std::vector<int> ms;
    for (const auto& m : x.prime_memberships) {
        int i = s.index_of(m);
        if (i < 0) throw DomainError("element references unknown label '" + m + "'");
        ms.push_back(i);
    }
    for (size_t split = 1; split < ms.size(); ++split) {
        std::vector<int> left(ms.begin(), ms.begin() + split);
        std::vector<int> right(ms.begin() + split, ms.end());
        auto A = fold_membership(s, left);
        auto B = fold_membership(s, right);
        if (!A || !B) continue;
        int C = s.index_of(x.membership);
        if (s.has_relator(*A, *B, C))
            rep.faces.push_back({s.labels[*A], s.labels[*B], s.labels[C]});
    }
    return rep;
}

GeneralizedRelator spectrum(const Element& x) {
    return GeneralizedRelator{x.prime_memberships, x.membership};
}

}  // namespace scfred::degen
