#include "scfred/algebra.hpp"

#include "scfred/errors.hpp"

namespace scfred::algebra {

CountingFunction CountingFunction::zeros(const degen::DegenerationStructure& s, Ring ring) {
    CountingFunction f;
    f.structure = s;
    f.ring = ring;
    f.values.assign(s.labels.size(), 0);
    f.parity.assign(s.labels.size(), 0);
    return f;
}

long long CountingFunction::value(const std::string& label) const {
    int i = structure.index_of(label);
    if (i < 0) throw DomainError("unknown label '" + label + "'");
    return values[i];
}

void CountingFunction::set(const std::string& label, long long v) {
    int i = structure.index_of(label);
    if (i < 0) throw DomainError("unknown label '" + label + "'");
    values[i] = ring == Ring::Z2 ? ((v % 2) + 2) % 2 : v;
}

void CountingFunction::set_parity(const std::string& label, int p) {
    int i = structure.index_of(label);
    if (i < 0) throw DomainError("unknown label '" + label + "'");
    parity[i] = p & 1;
}

void CountingFunction::reduce() {
    if (ring == Ring::Z2)
        for (auto& v : values) v = ((v % 2) + 2) % 2;
}

bool CountingFunction::is_zero() const {
    for (long long v : values)
        if (v != 0) return false;
    return true;
}

int CountingFunction::homogeneous_parity() const {
    int found = -2;
    for (size_t i = 0; i < values.size(); ++i) {
        if (values[i] == 0) continue;
        if (found == -2)
            found = parity[i];
        else if (found != parity[i])
            return -1;
    }
    return found == -2 ? 0 : found;
}

namespace {

void check_same_structure(const CountingFunction& a, const CountingFunction& b) {
    if (!(a.structure == b.structure) || a.ring != b.ring)
        throw StructureMismatchError("counting functions live on different structures");
}

}  // namespace

CountingFunction convolve(const CountingFunction& alpha, const CountingFunction& beta) {
    check_same_structure(alpha, beta);
    CountingFunction out = CountingFunction::zeros(alpha.structure, alpha.ring);
    out.parity = alpha.parity;
    for (const auto& r : alpha.structure.relators)
        out.values[r[2]] += alpha.values[r[0]] * beta.values[r[1]];
    out.reduce();
    return out;
}

CountingFunction graded_commutator(const CountingFunction& alpha, const CountingFunction& beta) {
    check_same_structure(alpha, beta);
    int pa = alpha.homogeneous_parity();
    int pb = beta.homogeneous_parity();
    if (pa < 0 || pb < 0) throw GradingError("commutator needs homogeneous inputs");
    CountingFunction ab = convolve(alpha, beta);
    CountingFunction ba = convolve(beta, alpha);
    CountingFunction out = CountingFunction::zeros(alpha.structure, alpha.ring);
    out.parity = alpha.parity;
    const long long sign = (pa == 1 && pb == 1) ? 1 : -1;
    for (size_t i = 0; i < out.values.size(); ++i) out.values[i] = ab.values[i] + sign * ba.values[i];
    out.reduce();
    return out;
}

DqOperator dq_operator(const CountingFunction& Q) {
    if (Q.homogeneous_parity() != 1 && !Q.is_zero())
        throw GradingError("D_Q needs an odd counting function");
    CountingFunction QQ = convolve(Q, Q);
    for (size_t i = 0; i < QQ.values.size(); ++i)
        if (QQ.values[i] != 0)
            throw NotADifferentialError("Q * Q does not vanish", Q.structure.labels[i]);

    const int n = static_cast<int>(Q.structure.labels.size());
    DqOperator dq;
    dq.structure = Q.structure;
    dq.ring = Q.ring;
    dq.matrix = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        CountingFunction e = CountingFunction::zeros(Q.structure, Q.ring);
        e.parity = Q.parity;
        e.values[j] = 1;
        // honor the grading of the indicator generator
        CountingFunction bracket = [&] {
            CountingFunction qe = convolve(Q, e);
            CountingFunction eq = convolve(e, Q);
            CountingFunction out = CountingFunction::zeros(Q.structure, Q.ring);
            const long long sign = (Q.parity[j] == 1) ? 1 : -1;  // Q itself is odd
            for (int i = 0; i < n; ++i) out.values[i] = qe.values[i] + sign * eq.values[i];
            out.reduce();
            return out;
        }();
        for (int i = 0; i < n; ++i) dq.matrix(i, j) = static_cast<double>(bracket.values[i]);
    }
    Eigen::MatrixXd sq = dq.matrix * dq.matrix;
    if (Q.ring == Ring::Z2)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) sq(i, j) = std::fmod(sq(i, j), 2.0);
    dq.squares_to_zero = sq.cwiseAbs().maxCoeff() < 1e-9;
    return dq;
}

DqHomology dq_homology(const DqOperator& dq, const std::vector<int>& parity) {
    const int n = static_cast<int>(dq.structure.labels.size());
    MatrixXi M(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            M(i, j) = static_cast<int>(std::llround(std::abs(dq.matrix(i, j)))) & 1;
    int rank = gf2_rank(M);
    DqHomology h;
    h.total = n - 2 * rank;  // dim ker - rank = (n - rank) - rank
    // per-parity: D maps parity p to parity p + 1
    for (int p = 0; p < 2; ++p) {
        std::vector<int> cols, other;
        for (int j = 0; j < n; ++j) (parity[j] == p ? cols : other).push_back(j);
        MatrixXi Mp(n, static_cast<int>(cols.size()));
        for (size_t j = 0; j < cols.size(); ++j) Mp.col(static_cast<int>(j)) = M.col(cols[j]);
        MatrixXi Mo(n, static_cast<int>(other.size()));
        for (size_t j = 0; j < other.size(); ++j) Mo.col(static_cast<int>(j)) = M.col(other[j]);
        int ker_p = static_cast<int>(cols.size()) - gf2_rank(Mp);
        int im_o = gf2_rank(Mo);
        (p == 0 ? h.even : h.odd) = ker_p - im_o;
    }
    return h;
}

ChainComplexF2 verify_complex(ChainComplexF2 complex) {
    const int n = static_cast<int>(complex.basis.size());
    if (complex.boundary.rows() != n || complex.boundary.cols() != n)
        throw DomainError("boundary matrix must be square over the basis");
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            int v = ((complex.boundary(i, j) % 2) + 2) % 2;
            complex.boundary(i, j) = v;
            if (v != 0 && complex.grading[i] != complex.grading[j] - 1)
                throw DomainError("boundary entry does not lower the grading by one");
        }
    MatrixXi sq = complex.boundary * complex.boundary;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if ((sq(i, j) % 2 + 2) % 2 != 0)
                throw NotADifferentialError("boundary does not square to zero",
                                            complex.basis[j]);
    complex.verified = true;
    return complex;
}

int gf2_rank(MatrixXi m) {
    const int rows = static_cast<int>(m.rows());
    const int cols = static_cast<int>(m.cols());
    int rank = 0;
    for (int c = 0; c < cols && rank < rows; ++c) {
        int pivot = -1;
        for (int r = rank; r < rows; ++r)
            if ((m(r, c) & 1) != 0) {
                pivot = r;
                break;
            }
        if (pivot < 0) continue;
        m.row(pivot).swap(m.row(rank));
        for (int r = 0; r < rows; ++r)
            if (r != rank && (m(r, c) & 1) != 0) m.row(r) = (m.row(r) + m.row(rank)).unaryExpr([](int x) { return x & 1; });
        ++rank;
    }
    return rank;
}

std::vector<int> homology_f2(const ChainComplexF2& complex) {
    if (!complex.verified)
        throw MustVerifyFirstError("verify the complex before computing homology");
    const int n = static_cast<int>(complex.basis.size());
    int max_grade = 0;
    for (int g : complex.grading) max_grade = std::max(max_grade, g);
    std::vector<int> betti(max_grade + 1, 0);
    for (int k = 0; k <= max_grade; ++k) {
        std::vector<int> level, above;
        for (int j = 0; j < n; ++j) {
            if (complex.grading[j] == k) level.push_back(j);
            if (complex.grading[j] == k + 1) above.push_back(j);
        }
        MatrixXi from_level(n, static_cast<int>(level.size()));
        for (size_t j = 0; j < level.size(); ++j)
            from_level.col(static_cast<int>(j)) = complex.boundary.col(level[j]);
        MatrixXi from_above(n, static_cast<int>(above.size()));
        for (size_t j = 0; j < above.size(); ++j)
            from_above.col(static_cast<int>(j)) = complex.boundary.col(above[j]);
        int ker = static_cast<int>(level.size()) - gf2_rank(from_level);
        int im = gf2_rank(from_above);
        betti[k] = ker - im;
    }
    return betti;
}

ChainComplexF2 representation_complex(const degen::PairStructure& pairs,
                                      const CountingFunction& Q,
                                      const std::vector<int>& morse_index) {
    if (!(Q.structure == pairs.structure))
        throw StructureMismatchError("Q does not live on the pair structure");
    const int npts = static_cast<int>(pairs.point_labels.size());
    if (static_cast<int>(morse_index.size()) != npts)
        throw DomainError("need one Morse index per critical point");
    for (size_t i = 0; i < Q.values.size(); ++i) {
        if (Q.values[i] == 0) continue;
        auto [a, b] = pairs.pair_endpoints[i];
        if (morse_index[b] - morse_index[a] != 1)
            throw PreconditionError("Q is supported on a pair with index difference " +
                                    std::to_string(morse_index[b] - morse_index[a]));
    }
    ChainComplexF2 complex;
    complex.basis = pairs.point_labels;
    complex.grading = morse_index;
    complex.boundary = MatrixXi::Zero(npts, npts);
    for (size_t i = 0; i < Q.values.size(); ++i) {
        if (Q.values[i] == 0) continue;
        auto [a, b] = pairs.pair_endpoints[i];
        complex.boundary(a, b) = static_cast<int>(((Q.values[i] % 2) + 2) % 2);
    }
    return verify_complex(std::move(complex));
}

}  // namespace scfred::algebra
