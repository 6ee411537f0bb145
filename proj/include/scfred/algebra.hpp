#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "scfred/degen.hpp"

namespace scfred::algebra {

using Eigen::MatrixXi;

enum class Ring { Z2, Z };

/// Map S -> Lambda on a degeneration structure, with the even/odd grading.
struct CountingFunction {
    degen::DegenerationStructure structure;
    Ring ring = Ring::Z2;
    std::vector<long long> values;  // one per label, reduced mod 2 for Z2
    std::vector<int> parity;        // 0 even, 1 odd

    static CountingFunction zeros(const degen::DegenerationStructure& s, Ring ring);
    long long value(const std::string& label) const;
    void set(const std::string& label, long long v);
    void set_parity(const std::string& label, int p);
    void reduce();
    bool is_zero() const;
    /// -1 mixed, else the common parity of the support (0 when empty).
    int homogeneous_parity() const;
};

/// (alpha * beta)(C) = sum over relators (A,B;C) of alpha(A) beta(B).
CountingFunction convolve(const CountingFunction& alpha, const CountingFunction& beta);

/// alpha * beta + beta * alpha when both inputs are odd, alpha * beta -
/// beta * alpha otherwise. Inputs must be homogeneous.
CountingFunction graded_commutator(const CountingFunction& alpha, const CountingFunction& beta);

/// The differential D_Q(lambda) = [Q, lambda] as a matrix in the indicator
/// basis of S.
struct DqOperator {
    degen::DegenerationStructure structure;
    Ring ring;
    Eigen::MatrixXd matrix;  // integer-valued; reduced mod 2 for Z2
    bool squares_to_zero = false;
};

/// Requires Q odd-graded with Q * Q = 0 (otherwise NotADifferentialError
/// carrying a witness label).
DqOperator dq_operator(const CountingFunction& Q);

struct DqHomology {
    int total = 0;
    int even = 0;
    int odd = 0;
};

/// For the two-element field: dim ker - rank, in total and per parity class.
DqHomology dq_homology(const DqOperator& dq, const std::vector<int>& parity);

/// Chain complex over F2, graded by integers; the boundary lowers the
/// grading by one.
struct ChainComplexF2 {
    std::vector<std::string> basis;
    std::vector<int> grading;
    MatrixXi boundary;  // entries 0/1, column j = boundary of generator j
    bool verified = false;
};

/// Checks boundary^2 = 0 over F2 and that entries respect the grading; sets
/// the verified flag.
ChainComplexF2 verify_complex(ChainComplexF2 complex);

/// Betti numbers per grading value (index k holds dim H_k). Requires a
/// verified complex.
std::vector<int> homology_f2(const ChainComplexF2& complex);

/// Rank of a 0/1 matrix over the two-element field.
int gf2_rank(MatrixXi m);

/// The representation (Q h)(a) = sum over (a,b) in S of Q(a,b) h(b) on the
/// space of maps from critical points to F2, graded by the Morse index.
/// Q must be supported on index-difference-one pairs and square to zero.
ChainComplexF2 representation_complex(const degen::PairStructure& pairs,
                                      const CountingFunction& Q,
                                      const std::vector<int>& morse_index);

}  // namespace scfred::algebra
