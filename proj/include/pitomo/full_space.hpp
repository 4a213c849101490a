#pragma once

// Brute-force 2^N-dimensional reference implementations.
//
// Everything here works in the full tensor-product space and only scales to a
// few qubits. It exists to cross-check the compressed block machinery. Qubit 0
// is the most significant bit of a computational basis index.

#include <vector>

#include "pitomo/spin_blocks.hpp"

namespace pitomo::full {

inline constexpr int kMaxOracleQubits = 12;

Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();

/// Kronecker product of the factors, first factor on qubit 0.
Matrix kron_all(const std::vector<Matrix>& factors);

/// Orthonormal spin basis |j,m,alpha> of one sector as columns; column
/// alpha * (2j+1) + (j - m) holds |j,m,alpha>.
///
/// Highest-weight vectors come from Gram-Schmidt over qubit permutations of
/// |0>^(2j) (x) |psi->^((N-2j)/2); candidates whose residual norm falls below
/// 1e-8 are discarded. Lower m follow from repeated application of
/// J- = sum_n sigma_-;n.
Matrix spin_basis(const SpinSectorLayout& layout, int sector);

/// The 2^N x 2^N density operator of a compressed ensemble.
Matrix expand_full(const SpinEnsemble& e);

/// Blocks tr_{K_j}(P_j rho P_j) of a full operator; the inverse of expand_full
/// for permutationally invariant input.
SpinEnsemble compress_full(const SpinSectorLayout& layout, const Matrix& rho);

/// Coarse-grained POVM elements M_k, k = number of +1 outcomes of a.sigma,
/// as the sum over distinct placements of k projectors (1 + a.sigma)/2 and
/// N-k projectors (1 - a.sigma)/2.
std::vector<Matrix> coarse_grained_povm(int n_qubits, const Vector3& axis);

/// V(p)|i_1..i_N> = |i_{p^-1(1)}..i_{p^-1(N)}>; perm[n] is the image of qubit n.
Matrix permutation_operator(int n_qubits, const std::vector<int>& perm);

/// U^(x)N for a single-qubit unitary U.
Matrix collective_unitary(int n_qubits, const Matrix& single);

/// Projector onto the symmetric subspace.
Matrix symmetric_projector(int n_qubits);

/// (a.sigma)^(x)w (x) 1^(x)(N-w); for permutationally invariant states its
/// expectation equals that of the symmetrized operator.
Matrix axis_power_operator(int n_qubits, const Vector3& axis, int weight);

}  // namespace pitomo::full
