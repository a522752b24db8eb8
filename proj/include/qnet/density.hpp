#pragma once

// Brute-force density-matrix reference for the closed-form Werner maps.
// Small registers only (2 to 4 qubits); qubit 0 is the most significant bit.

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstddef>
#include <vector>

#include "qnet/core.hpp"

namespace qnet::density {

template <typename Scalar>
using Complex = std::complex<Scalar>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Ket = Eigen::Matrix<Complex<Scalar>, Eigen::Dynamic, 1>;

template <typename Scalar>
Ket<Scalar> bell_ket(BellState state) {
    return bell_amplitudes<Scalar>(state).template cast<Complex<Scalar>>();
}

template <typename Scalar>
Matrix<Scalar> kron(const Matrix<Scalar>& a, const Matrix<Scalar>& b) {
    Matrix<Scalar> out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

template <typename Scalar>
Matrix<Scalar> werner(Scalar w, BellState target = BellState::PsiPlus) {
    const Ket<Scalar> psi = bell_ket<Scalar>(target);
    return Complex<Scalar>(w) * (psi * psi.adjoint()) +
           Complex<Scalar>((Scalar(1) - w) / Scalar(4)) * Matrix<Scalar>::Identity(4, 4);
}

template <typename Scalar>
std::array<Matrix<Scalar>, 4> paulis() {
    using C = Complex<Scalar>;
    Matrix<Scalar> i = Matrix<Scalar>::Identity(2, 2);
    Matrix<Scalar> x(2, 2), y(2, 2), z(2, 2);
    x << C(0), C(1), C(1), C(0);
    y << C(0), C(0, -1), C(0, 1), C(0);
    z << C(1), C(0), C(0), C(-1);
    return {i, x, y, z};
}

// Single-qubit operator `op` acting on qubit `k` of an n-qubit register.
template <typename Scalar>
Matrix<Scalar> on_qubit(const Matrix<Scalar>& op, int k, int n) {
    Matrix<Scalar> out = Matrix<Scalar>::Identity(1, 1);
    for (int q = 0; q < n; ++q)
        out = kron<Scalar>(out, q == k ? op : Matrix<Scalar>::Identity(2, 2));
    return out;
}

template <typename Scalar>
Matrix<Scalar> cnot(int control, int target, int n) {
    const Eigen::Index dim = Eigen::Index(1) << n;
    Matrix<Scalar> u = Matrix<Scalar>::Zero(dim, dim);
    for (Eigen::Index s = 0; s < dim; ++s) {
        Eigen::Index t = s;
        if ((s >> (n - 1 - control)) & 1) t ^= Eigen::Index(1) << (n - 1 - target);
        u(t, s) = Complex<Scalar>(1);
    }
    return u;
}

// Projector onto computational outcome `bit` of qubit k.
template <typename Scalar>
Matrix<Scalar> project_bit(int k, int bit, int n) {
    Matrix<Scalar> p = Matrix<Scalar>::Zero(2, 2);
    p(bit, bit) = Complex<Scalar>(1);
    return on_qubit<Scalar>(p, k, n);
}

// Reduced state on `keep` (ascending qubit order) of an n-qubit matrix.
template <typename Scalar>
Matrix<Scalar> partial_trace(const Matrix<Scalar>& rho, const std::vector<int>& keep, int n) {
    std::vector<int> traced;
    for (int q = 0; q < n; ++q) {
        bool kept = false;
        for (int k : keep) kept = kept || k == q;
        if (!kept) traced.push_back(q);
    }
    auto compose = [&](Eigen::Index kept_bits, Eigen::Index traced_bits) {
        Eigen::Index s = 0;
        for (std::size_t i = 0; i < keep.size(); ++i)
            if ((kept_bits >> (keep.size() - 1 - i)) & 1) s |= Eigen::Index(1) << (n - 1 - keep[i]);
        for (std::size_t i = 0; i < traced.size(); ++i)
            if ((traced_bits >> (traced.size() - 1 - i)) & 1)
                s |= Eigen::Index(1) << (n - 1 - traced[i]);
        return s;
    };
    const Eigen::Index dk = Eigen::Index(1) << keep.size();
    const Eigen::Index dt = Eigen::Index(1) << traced.size();
    Matrix<Scalar> out = Matrix<Scalar>::Zero(dk, dk);
    for (Eigen::Index i = 0; i < dk; ++i)
        for (Eigen::Index j = 0; j < dk; ++j)
            for (Eigen::Index t = 0; t < dt; ++t) out(i, j) += rho(compose(i, t), compose(j, t));
    return out;
}

template <typename Scalar>
Scalar fidelity(const Matrix<Scalar>& rho, BellState target = BellState::PsiPlus) {
    const Ket<Scalar> psi = bell_ket<Scalar>(target);
    return (psi.adjoint() * rho * psi)(0, 0).real();
}

template <typename Scalar>
struct PurificationResult {
    Scalar p_success;
    Scalar fidelity;
};

// Registers [A1, B1, A2, B2]; CNOT A1->A2 and B1->B2, measure A2 and B2 in Z,
// keep pair 1 when the outcomes agree.
template <typename Scalar>
PurificationResult<Scalar> purify(Scalar fa, Scalar fb) {
    const Scalar wa = (Scalar(4) * fa - Scalar(1)) / Scalar(3);
    const Scalar wb = (Scalar(4) * fb - Scalar(1)) / Scalar(3);
    Matrix<Scalar> rho = kron<Scalar>(werner<Scalar>(wa), werner<Scalar>(wb));
    const Matrix<Scalar> u = cnot<Scalar>(1, 3, 4) * cnot<Scalar>(0, 2, 4);
    rho = u * rho * u.adjoint();
    Matrix<Scalar> kept = Matrix<Scalar>::Zero(16, 16);
    for (int bit : {0, 1}) {
        const Matrix<Scalar> p = project_bit<Scalar>(2, bit, 4) * project_bit<Scalar>(3, bit, 4);
        kept += p * rho * p;
    }
    const Scalar prob = kept.trace().real();
    const Matrix<Scalar> pair = partial_trace<Scalar>(kept, {0, 1}, 4) / Complex<Scalar>(prob);
    return {prob, fidelity<Scalar>(pair)};
}

// Registers [A, B1, B2, C]; Bell measurement on (B1, B2), Pauli correction on
// C chosen from the noiseless outcome, averaged over the four outcomes.
// Returns the fidelity of the corrected A-C pair.
template <typename Scalar>
Scalar swap_fidelity(Scalar w1, Scalar w2) {
    const auto pauli = paulis<Scalar>();
    auto conditional = [&](const Matrix<Scalar>& rho, BellState outcome) {
        const Ket<Scalar> beta = bell_ket<Scalar>(outcome);
        const Matrix<Scalar> proj = kron<Scalar>(
            kron<Scalar>(Matrix<Scalar>::Identity(2, 2), beta * beta.adjoint()),
            Matrix<Scalar>::Identity(2, 2));
        return partial_trace<Scalar>(proj * rho * proj, {0, 3}, 4);
    };
    const Matrix<Scalar> noisy = kron<Scalar>(werner<Scalar>(w1), werner<Scalar>(w2));
    const Matrix<Scalar> pure = kron<Scalar>(werner<Scalar>(Scalar(1)), werner<Scalar>(Scalar(1)));

    Scalar total = 0;
    for (BellState outcome : {BellState::PsiPlus, BellState::PsiMinus, BellState::PhiPlus,
                              BellState::PhiMinus}) {
        const Matrix<Scalar> ideal = conditional(pure, outcome);
        const Scalar p_ideal = ideal.trace().real();
        std::size_t best = 0;
        Scalar best_f = -1;
        for (std::size_t k = 0; k < pauli.size(); ++k) {
            const Matrix<Scalar> c = on_qubit<Scalar>(pauli[k], 1, 2);
            const Scalar f = fidelity<Scalar>(c * ideal * c.adjoint()) / p_ideal;
            if (f > best_f) {
                best_f = f;
                best = k;
            }
        }
        const Matrix<Scalar> c = on_qubit<Scalar>(pauli[best], 1, 2);
        total += fidelity<Scalar>(c * conditional(noisy, outcome) * c.adjoint());
    }
    return total;
}

// Depolarizing memory noise with survival lambda on each listed qubit of a
// Werner pair; returns the resulting fidelity.
template <typename Scalar>
Scalar depolarized_fidelity(Scalar w, Scalar lambda, const std::vector<int>& qubits) {
    Matrix<Scalar> rho = werner<Scalar>(w);
    const auto pauli = paulis<Scalar>();
    for (int q : qubits) {
        Matrix<Scalar> twirled = Matrix<Scalar>::Zero(4, 4);
        for (const auto& p : pauli) {
            const Matrix<Scalar> u = on_qubit<Scalar>(p, q, 2);
            twirled += u * rho * u.adjoint();
        }
        twirled /= Complex<Scalar>(4);
        rho = Complex<Scalar>(lambda) * rho + Complex<Scalar>(Scalar(1) - lambda) * twirled;
    }
    return fidelity<Scalar>(rho);
}

} // namespace qnet::density
