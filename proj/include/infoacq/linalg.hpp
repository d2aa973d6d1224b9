#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>
#include <string_view>

#include "errors.hpp"

namespace infoacq {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double jitter_start = 1e-10;
inline constexpr double jitter_limit = 1e-6;

struct JitteredCholesky {
    Eigen::LLT<Matrix> llt;
    double jitter = 0.0;  // absolute amount added to the diagonal

    [[nodiscard]] double logdet() const {
        return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    }
    template <class Rhs>
    [[nodiscard]] typename Rhs::PlainObject solve(const Eigen::MatrixBase<Rhs>& rhs) const {
        return llt.solve(rhs);
    }
};

inline Matrix symmetrized(const Matrix& a) { return 0.5 * (a + a.transpose()); }

// Cholesky with escalating diagonal jitter scaled by the mean diagonal.
inline JitteredCholesky cholesky(const Matrix& a, std::string_view what = "matrix") {
    if (a.rows() != a.cols()) throw contract_error(std::string(what) + ": not square");
    JitteredCholesky out;
    if (a.rows() == 0) {
        out.llt.compute(a);
        return out;
    }
    const Matrix sym = symmetrized(a);
    out.llt.compute(sym);
    if (out.llt.info() == Eigen::Success) return out;
    double scale = sym.diagonal().mean();
    if (!(scale > 0.0)) scale = 1.0;
    for (double rel = jitter_start; rel <= jitter_limit * (1.0 + 1e-9); rel *= 10.0) {
        out.jitter = rel * scale;
        Matrix shifted = sym;
        shifted.diagonal().array() += out.jitter;
        out.llt.compute(shifted);
        if (out.llt.info() == Eigen::Success) return out;
    }
    throw numeric_error(std::string(what) + ": Cholesky failed after jitter " +
                        std::to_string(jitter_limit * scale));
}

inline double logdet_spd(const Matrix& a, std::string_view what = "matrix") {
    return cholesky(a, what).logdet();
}

// Symmetric square root factor S with S Sᵀ = a for PSD a (negative eigenvalues clipped).
inline Matrix psd_factor(const Matrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrized(a));
    if (eig.info() != Eigen::Success) throw numeric_error("eigendecomposition failed");
    const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * root.asDiagonal();
}

// Whitened form L⁻¹ A L⁻ᵀ for L the Cholesky factor of an SPD matrix.
inline Matrix whiten(const JitteredCholesky& chol, const Matrix& a) {
    const auto l = chol.llt.matrixL();
    Matrix tmp = l.solve(a);
    Matrix out = l.solve(tmp.transpose());
    return symmetrized(out);
}

} // namespace infoacq
