#pragma once

// Dense rank-1 decomposition primitives: the leading singular triplet of a
// matrix and the rank-1 higher-order SVD of a Space x Feature x Time tensor.
//
// Both are built on power iteration over the Gram matrix of the smaller side.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eigenevent/error.hpp"

namespace eigenevent {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct PowerOptions {
    /// Relative change of the eigenvalue estimate between iterations.
    double tol = 1e-10;
    /// Estimated distance of the iterate from the limit, from the step size
    /// and the observed contraction rate.
    double vec_tol = 1e-10;
    int max_iter = 1000;
    /// When false a non-converged run is returned with `degenerate` set.
    bool throw_on_nonconvergence = false;
};

/// Flip `v` so that its entry sum is nonnegative. When the sum vanishes the
/// largest-magnitude entry (first one on ties) is made positive.
/// Returns true when the vector was negated.
inline bool sign_normalize(Vector& v) {
    if (v.size() == 0) return false;
    const double sum = v.sum();
    const double scale = v.cwiseAbs().sum();
    bool flip = false;
    if (std::abs(sum) > 1e-12 * scale) {
        flip = sum < 0.0;
    } else {
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        flip = v[arg] < 0.0;
    }
    if (flip) v = -v;
    return flip;
}

inline Vector canonical_basis(Eigen::Index n, Eigen::Index i = 0) {
    Vector e = Vector::Zero(n);
    e[i] = 1.0;
    return e;
}

struct EigenPair {
    double value = 0.0;
    Vector vector;
    bool converged = true;
    int iterations = 0;
};

namespace detail {

inline Vector power_start(Eigen::Index n) {
    // Positive, non-constant start vector.
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = 1.0 + 0.5 * static_cast<double>(i + 1) / static_cast<double>(n);
    return v.normalized();
}

}  // namespace detail

/// Largest eigenpair of a symmetric positive semidefinite matrix.
inline EigenPair leading_eigenpair(const Matrix& gram, const PowerOptions& opts = {}) {
    const Eigen::Index n = gram.rows();
    EigenPair out;
    if (gram.cwiseAbs().maxCoeff() == 0.0) {
        out.vector = canonical_basis(n);
        return out;
    }

    Vector v = detail::power_start(n);
    Vector w = gram * v;
    if (w.norm() == 0.0) {
        Eigen::Index arg = 0;
        gram.diagonal().maxCoeff(&arg);
        v = canonical_basis(n, arg);
        w = gram * v;
    }

    double estimate = w.norm();
    double prev_step = 0.0;
    out.converged = false;
    for (int it = 1; it <= opts.max_iter; ++it) {
        Vector next = w / w.norm();
        const double step = (next - v).norm();
        v = std::move(next);
        w = gram * v;
        const double updated = w.norm();
        const double rel = std::abs(updated - estimate) / updated;
        estimate = updated;
        out.iterations = it;
        const double rate = prev_step > 0.0 ? std::min(step / prev_step, 1.0 - 1e-6) : 0.0;
        const double remaining = step * rate / (1.0 - rate);
        prev_step = step;
        if (rel <= opts.tol && step <= opts.vec_tol && remaining <= opts.vec_tol) {
            out.converged = true;
            break;
        }
    }
    if (!out.converged && opts.throw_on_nonconvergence) {
        throw NonConvergence("power iteration did not converge in " + std::to_string(opts.max_iter) +
                             " iterations");
    }
    out.value = v.dot(gram * v);
    out.vector = std::move(v);
    return out;
}

struct SingularTriplet {
    double sigma = 0.0;
    Vector u;
    Vector v;
    /// Power iteration hit max_iter (usually a near-tie of the top two values).
    bool degenerate = false;
};

/// Leading singular value and vectors of `m`. `u` follows the sign convention
/// of sign_normalize and `v` is oriented so that sigma * u * v^T is the best
/// rank-1 approximation. A zero matrix yields sigma = 0 and e_0 vectors.
inline SingularTriplet leading_singular_triplet(const Matrix& m, const PowerOptions& opts = {}) {
    if (m.rows() < 1 || m.cols() < 1) throw DataError("matrix must have at least one row and column");
    if (!m.allFinite()) throw DataError("matrix has non-finite entries");

    SingularTriplet out;
    if (m.cwiseAbs().maxCoeff() == 0.0) {
        out.u = canonical_basis(m.rows());
        out.v = canonical_basis(m.cols());
        return out;
    }

    if (m.rows() <= m.cols()) {
        const Matrix gram = m * m.transpose();
        EigenPair pair = leading_eigenpair(gram, opts);
        out.degenerate = !pair.converged;
        out.u = std::move(pair.vector);
        sign_normalize(out.u);
        out.v = m.transpose() * out.u;
    } else {
        const Matrix gram = m.transpose() * m;
        EigenPair pair = leading_eigenpair(gram, opts);
        out.degenerate = !pair.converged;
        out.u = m * pair.vector;
        const double norm = out.u.norm();
        if (norm == 0.0) {
            out.u = canonical_basis(m.rows());
        } else {
            out.u /= norm;
        }
        sign_normalize(out.u);
        out.v = m.transpose() * out.u;
    }
    out.sigma = out.v.norm();
    if (out.sigma == 0.0) {
        out.v = canonical_basis(m.cols());
    } else {
        out.v /= out.sigma;
    }
    return out;
}

enum class Mode { space = 0, feature = 1, time = 2 };

/// Dense 3-way tensor indexed (space, feature, time), stored space-fastest:
/// offset = s + n_space * (f + n_feature * t). Every time slice is therefore a
/// contiguous column-major n_space x n_feature matrix.
class Tensor3 {
  public:
    Tensor3() = default;

    Tensor3(std::size_t n_space, std::size_t n_feature, std::size_t n_time)
        : dims_{n_space, n_feature, n_time}, data_(n_space * n_feature * n_time, 0.0) {
        if (n_space == 0 || n_feature == 0 || n_time == 0) throw DataError("tensor dimensions must be >= 1");
    }

    /// Stack equally shaped matrices along the time mode.
    static Tensor3 from_slices(std::span<const Matrix* const> slices) {
        if (slices.empty()) throw DataError("cannot build a tensor from zero slices");
        Tensor3 t(static_cast<std::size_t>(slices.front()->rows()),
                  static_cast<std::size_t>(slices.front()->cols()), slices.size());
        for (std::size_t k = 0; k < slices.size(); ++k) {
            const Matrix& s = *slices[k];
            if (static_cast<std::size_t>(s.rows()) != t.dims_[0] || static_cast<std::size_t>(s.cols()) != t.dims_[1])
                throw DataError("tensor slices differ in shape");
            t.slice(k) = s;
        }
        return t;
    }

    const std::array<std::size_t, 3>& dims() const { return dims_; }
    std::size_t dim(Mode m) const { return dims_[static_cast<std::size_t>(m)]; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t s, std::size_t f, std::size_t t) { return data_[offset(s, f, t)]; }
    double operator()(std::size_t s, std::size_t f, std::size_t t) const { return data_[offset(s, f, t)]; }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }

    Eigen::Map<Matrix> slice(std::size_t t) {
        return {data_.data() + dims_[0] * dims_[1] * t, static_cast<Eigen::Index>(dims_[0]),
                static_cast<Eigen::Index>(dims_[1])};
    }
    Eigen::Map<const Matrix> slice(std::size_t t) const {
        return {data_.data() + dims_[0] * dims_[1] * t, static_cast<Eigen::Index>(dims_[0]),
                static_cast<Eigen::Index>(dims_[1])};
    }

    double frobenius_norm() const {
        double acc = 0.0;
        for (double x : data_) acc += x * x;
        return std::sqrt(acc);
    }

    Tensor3& operator*=(double s) {
        for (double& x : data_) x *= s;
        return *this;
    }

  private:
    std::size_t offset(std::size_t s, std::size_t f, std::size_t t) const {
        return s + dims_[0] * (f + dims_[1] * t);
    }

    std::array<std::size_t, 3> dims_{0, 0, 0};
    std::vector<double> data_;
};

/// Matricize along `mode`. Rows index the chosen mode; columns enumerate the
/// remaining two modes with the first remaining one varying fastest:
///   space:   col = f + n_feature * t
///   feature: col = s + n_space * t
///   time:    col = s + n_space * f
inline Matrix mode_unfold(const Tensor3& t, Mode mode) {
    const auto [ns, nf, nt] = t.dims();
    const auto S = static_cast<Eigen::Index>(ns);
    const auto F = static_cast<Eigen::Index>(nf);
    const auto T = static_cast<Eigen::Index>(nt);
    const double* p = t.data().data();
    switch (mode) {
        case Mode::space:
            return Eigen::Map<const Matrix>(p, S, F * T);
        case Mode::feature: {
            Matrix out(F, S * T);
            for (Eigen::Index k = 0; k < T; ++k)
                out.middleCols(k * S, S) = Eigen::Map<const Matrix>(p + S * F * k, S, F).transpose();
            return out;
        }
        case Mode::time:
            return Eigen::Map<const Matrix>(p, S * F, T).transpose();
    }
    return {};
}

/// Inverse of mode_unfold.
inline Tensor3 mode_fold(const Matrix& m, Mode mode, const std::array<std::size_t, 3>& dims) {
    Tensor3 t(dims[0], dims[1], dims[2]);
    const auto S = static_cast<Eigen::Index>(dims[0]);
    const auto F = static_cast<Eigen::Index>(dims[1]);
    const auto T = static_cast<Eigen::Index>(dims[2]);
    const Eigen::Index expected_rows = mode == Mode::space ? S : mode == Mode::feature ? F : T;
    if (m.rows() != expected_rows || m.size() != S * F * T) throw DataError("matrix shape does not match fold target");
    double* p = t.data().data();
    switch (mode) {
        case Mode::space:
            Eigen::Map<Matrix>(p, S, F * T) = m;
            break;
        case Mode::feature:
            for (Eigen::Index k = 0; k < T; ++k)
                Eigen::Map<Matrix>(p + S * F * k, S, F) = m.middleCols(k * S, S).transpose();
            break;
        case Mode::time:
            Eigen::Map<Matrix>(p, S * F, T) = m.transpose();
            break;
    }
    return t;
}

/// Principal eigenvalue and per-mode principal eigenvectors of a window
/// matrix (no time vector) or a baseline tensor.
struct EigenSummary {
    double lambda = 0.0;
    Vector vec_space;
    Vector vec_feature;
    std::optional<Vector> vec_time;
    bool degenerate = false;
};

/// Summary of a single Space x Feature matrix: leading singular value with
/// both singular vectors sign-normalized independently.
inline EigenSummary summarize(const Matrix& m, const PowerOptions& opts = {}) {
    SingularTriplet st = leading_singular_triplet(m, opts);
    EigenSummary out;
    out.lambda = st.sigma;
    out.vec_space = std::move(st.u);
    out.vec_feature = std::move(st.v);
    sign_normalize(out.vec_feature);
    out.degenerate = st.degenerate;
    return out;
}

/// Rank-1 HOSVD: each mode vector is the leading left singular vector of the
/// corresponding unfolding, and lambda is the absolute value of the 1x1x1 core.
inline EigenSummary hosvd_rank1(const Tensor3& t, const PowerOptions& opts = {}) {
    if (t.size() == 0) throw DataError("empty tensor");
    std::array<Vector, 3> vecs;
    bool degenerate = false;
    for (Mode mode : {Mode::space, Mode::feature, Mode::time}) {
        SingularTriplet st = leading_singular_triplet(mode_unfold(t, mode), opts);
        degenerate = degenerate || st.degenerate;
        vecs[static_cast<std::size_t>(mode)] = std::move(st.u);
    }

    double core = 0.0;
    for (std::size_t k = 0; k < t.dims()[2]; ++k)
        core += vecs[2][static_cast<Eigen::Index>(k)] * vecs[0].dot(t.slice(k) * vecs[1]);

    EigenSummary out;
    out.lambda = std::abs(core);
    out.vec_space = std::move(vecs[0]);
    out.vec_feature = std::move(vecs[1]);
    out.vec_time = std::move(vecs[2]);
    out.degenerate = degenerate;
    return out;
}

}  // namespace eigenevent
