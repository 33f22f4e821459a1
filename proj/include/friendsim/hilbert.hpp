// Copyright 2026 The friendsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file
 * Dense complex linear algebra for small composite Hilbert spaces.
 *
 * A CompositeSpace is an ordered list of labeled factors. Basis indices are
 * row-major over that list: the digit of the LAST factor varies fastest, so
 * the basis string "hv" on (a, b) is index 0*2 + 1 = 1. Polarization and spin
 * map as h,u -> 0 and v,d -> 1.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "friendsim/errors.hpp"

namespace friendsim {

using cplx = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;
using Labels = std::vector<std::string>;

/// Tolerance for state validity checks (norm, trace, hermiticity, PSD).
inline constexpr double kValidityTol = 1e-10;
/// Tolerance for algebraic identities between two computed quantities.
inline constexpr double kIdentityTol = 1e-12;

struct Factor {
    std::string label;
    std::size_t dim = 2;

    friend bool operator==(const Factor &, const Factor &) = default;
};

class CompositeSpace {
  public:
    CompositeSpace() = default;

    explicit CompositeSpace(std::vector<Factor> factors) : factors_(std::move(factors)) {
        total_dim_ = 1;
        for (std::size_t k = 0; k < factors_.size(); ++k) {
            if (factors_[k].dim == 0) {
                throw ShapeError("factor '" + factors_[k].label + "' has dimension 0");
            }
            for (std::size_t j = 0; j < k; ++j) {
                if (factors_[j].label == factors_[k].label) {
                    throw LabelCollision("duplicate subsystem label '" + factors_[k].label + "'");
                }
            }
            total_dim_ *= factors_[k].dim;
        }
    }

    /// Space of two-level factors with the given labels.
    static CompositeSpace qubits(std::span<const std::string> labels) {
        std::vector<Factor> fs;
        fs.reserve(labels.size());
        for (const auto &l : labels) {
            fs.push_back({l, 2});
        }
        return CompositeSpace(std::move(fs));
    }
    static CompositeSpace qubits(std::initializer_list<std::string> labels) {
        return qubits(std::span<const std::string>(labels.begin(), labels.size()));
    }

    const std::vector<Factor> &factors() const { return factors_; }
    std::size_t num_factors() const { return factors_.size(); }
    std::size_t total_dim() const { return total_dim_; }

    Labels labels() const {
        Labels out;
        out.reserve(factors_.size());
        for (const auto &f : factors_) {
            out.push_back(f.label);
        }
        return out;
    }

    bool contains(std::string_view label) const {
        return std::any_of(factors_.begin(), factors_.end(), [&](const Factor &f) { return f.label == label; });
    }

    std::size_t position(std::string_view label) const {
        for (std::size_t k = 0; k < factors_.size(); ++k) {
            if (factors_[k].label == label) {
                return k;
            }
        }
        throw UnknownSubsystem("no subsystem labeled '" + std::string(label) + "' in " + describe());
    }

    std::size_t dim(std::string_view label) const { return factors_[position(label)].dim; }

    /// Distance in the flat index between neighbouring values of factor `pos`.
    std::size_t stride(std::size_t pos) const {
        std::size_t s = 1;
        for (std::size_t k = pos + 1; k < factors_.size(); ++k) {
            s *= factors_[k].dim;
        }
        return s;
    }

    std::size_t digit(std::size_t index, std::size_t pos) const { return (index / stride(pos)) % factors_[pos].dim; }

    std::vector<std::size_t> digits(std::size_t index) const {
        std::vector<std::size_t> out(factors_.size());
        for (std::size_t k = factors_.size(); k-- > 0;) {
            out[k] = index % factors_[k].dim;
            index /= factors_[k].dim;
        }
        return out;
    }

    std::size_t index(std::span<const std::size_t> ds) const {
        if (ds.size() != factors_.size()) {
            throw ShapeError("digit count does not match factor count of " + describe());
        }
        std::size_t idx = 0;
        for (std::size_t k = 0; k < factors_.size(); ++k) {
            if (ds[k] >= factors_[k].dim) {
                throw ShapeError("digit out of range for factor '" + factors_[k].label + "'");
            }
            idx = idx * factors_[k].dim + ds[k];
        }
        return idx;
    }

    /// Factors named in `labels`, in the order given.
    CompositeSpace select(std::span<const std::string> labels) const {
        std::vector<Factor> fs;
        for (const auto &l : labels) {
            fs.push_back(factors_[position(l)]);
        }
        return CompositeSpace(std::move(fs));
    }

    /// Factors NOT named in `labels`, in their original order.
    CompositeSpace without(std::span<const std::string> labels) const {
        for (const auto &l : labels) {
            (void)position(l);
        }
        std::vector<Factor> fs;
        for (const auto &f : factors_) {
            if (std::find(labels.begin(), labels.end(), f.label) == labels.end()) {
                fs.push_back(f);
            }
        }
        return CompositeSpace(std::move(fs));
    }

    CompositeSpace concat(const CompositeSpace &other) const {
        auto fs = factors_;
        fs.insert(fs.end(), other.factors_.begin(), other.factors_.end());
        return CompositeSpace(std::move(fs));
    }

    std::string describe() const {
        std::string s = "(";
        for (std::size_t k = 0; k < factors_.size(); ++k) {
            if (k) {
                s += ",";
            }
            s += factors_[k].label;
        }
        return s + ")";
    }

    friend bool operator==(const CompositeSpace &a, const CompositeSpace &b) { return a.factors_ == b.factors_; }

  private:
    std::vector<Factor> factors_;
    std::size_t total_dim_ = 1;
};

namespace detail {

/// For every flat index of `space`: the index within the factors in `labels`
/// (in the order given) and the index within all remaining factors.
struct IndexSplit {
    std::vector<std::size_t> inner;
    std::vector<std::size_t> outer;
    std::size_t inner_dim = 1;
    std::size_t outer_dim = 1;
};

inline IndexSplit split_indices(const CompositeSpace &space, std::span<const std::string> labels) {
    std::vector<std::size_t> positions;
    for (const auto &l : labels) {
        auto p = space.position(l);
        if (std::find(positions.begin(), positions.end(), p) != positions.end()) {
            throw ShapeError("subsystem '" + l + "' listed twice");
        }
        positions.push_back(p);
    }
    std::vector<bool> is_inner(space.num_factors(), false);
    for (auto p : positions) {
        is_inner[p] = true;
    }

    IndexSplit out;
    const auto &fs = space.factors();
    for (auto p : positions) {
        out.inner_dim *= fs[p].dim;
    }
    out.outer_dim = space.total_dim() / out.inner_dim;
    out.inner.resize(space.total_dim());
    out.outer.resize(space.total_dim());
    for (std::size_t i = 0; i < space.total_dim(); ++i) {
        auto ds = space.digits(i);
        std::size_t in = 0;
        for (auto p : positions) {
            in = in * fs[p].dim + ds[p];
        }
        std::size_t out_idx = 0;
        for (std::size_t k = 0; k < fs.size(); ++k) {
            if (!is_inner[k]) {
                out_idx = out_idx * fs[k].dim + ds[k];
            }
        }
        out.inner[i] = in;
        out.outer[i] = out_idx;
    }
    return out;
}

inline Labels in_space_order(const CompositeSpace &space, std::span<const std::string> labels) {
    Labels sorted(labels.begin(), labels.end());
    std::sort(sorted.begin(), sorted.end(),
              [&](const std::string &x, const std::string &y) { return space.position(x) < space.position(y); });
    return sorted;
}

inline std::size_t basis_digit(char c) {
    switch (c) {
    case 'h':
    case 'u':
        return 0;
    case 'v':
    case 'd':
        return 1;
    default:
        if (c >= '0' && c <= '9') {
            return static_cast<std::size_t>(c - '0');
        }
        throw ShapeError(std::string("unrecognized basis symbol '") + c + "'");
    }
}

inline std::size_t pattern_index(const CompositeSpace &space, std::string_view pattern) {
    if (pattern.size() != space.num_factors()) {
        throw ShapeError("basis pattern '" + std::string(pattern) + "' does not match " + space.describe());
    }
    std::vector<std::size_t> ds;
    for (char c : pattern) {
        ds.push_back(basis_digit(c));
    }
    return space.index(ds);
}

}  // namespace detail

/**
 * Amplitude vector over a CompositeSpace.
 *
 * Normally of unit norm. Sub-normalized states (for example the raw branch
 * surviving a heralded post-selection) are built with unnormalized() and
 * carry their squared norm explicitly.
 */
class PureState {
  public:
    PureState(CompositeSpace space, Vector amplitudes) : space_(std::move(space)), amps_(std::move(amplitudes)) {
        check_shape();
        norm2_ = amps_.squaredNorm();
        if (std::abs(norm2_ - 1.0) > kValidityTol) {
            throw InvariantViolation("state on " + space_.describe() + " has squared norm " + std::to_string(norm2_));
        }
    }

    static PureState unnormalized(CompositeSpace space, Vector amplitudes) {
        PureState s;
        s.space_ = std::move(space);
        s.amps_ = std::move(amplitudes);
        s.check_shape();
        s.norm2_ = s.amps_.squaredNorm();
        s.flagged_ = std::abs(s.norm2_ - 1.0) > kValidityTol;
        return s;
    }

    /// Computational basis state from a pattern such as "hv" or "ud0".
    static PureState basis(CompositeSpace space, std::string_view pattern) {
        Vector v = Vector::Zero(static_cast<Eigen::Index>(space.total_dim()));
        v(static_cast<Eigen::Index>(detail::pattern_index(space, pattern))) = 1.0;
        return PureState(std::move(space), std::move(v));
    }

    const CompositeSpace &space() const { return space_; }
    const Vector &amplitudes() const { return amps_; }
    std::size_t dim() const { return space_.total_dim(); }

    cplx amplitude(std::size_t index) const { return amps_(static_cast<Eigen::Index>(index)); }
    cplx amplitude(std::string_view pattern) const { return amplitude(detail::pattern_index(space_, pattern)); }

    double norm_squared() const { return norm2_; }
    /// True for a flagged sub-normalized state.
    bool unnormalized_flag() const { return flagged_; }

    PureState normalized() const {
        if (norm2_ <= 0.0) {
            throw InvariantViolation("cannot normalize a zero state");
        }
        return PureState(space_, amps_ / std::sqrt(norm2_));
    }

    cplx inner(const PureState &other) const {
        if (!(space_ == other.space_)) {
            throw ShapeError("inner product between states on " + space_.describe() + " and " +
                             other.space_.describe());
        }
        return amps_.dot(other.amps_);
    }

    /// The trivial state: amplitude 1 on the empty product space.
    PureState() : amps_(Vector::Ones(1)) {}

  private:
    void check_shape() const {
        if (static_cast<std::size_t>(amps_.size()) != space_.total_dim()) {
            throw ShapeError("amplitude vector of length " + std::to_string(amps_.size()) + " on space " +
                             space_.describe());
        }
    }

    CompositeSpace space_;
    Vector amps_;
    double norm2_ = 1.0;
    bool flagged_ = false;
};

/**
 * Square complex matrix over a CompositeSpace.
 *
 * Construction only checks the shape so that malformed inputs can still be
 * inspected with validate(); operations assume a valid density operator.
 */
class DensityOperator {
  public:
    DensityOperator(CompositeSpace space, Matrix matrix) : space_(std::move(space)), m_(std::move(matrix)) {
        const auto n = static_cast<Eigen::Index>(space_.total_dim());
        if (m_.rows() != n || m_.cols() != n) {
            throw ShapeError("density matrix of shape " + std::to_string(m_.rows()) + "x" +
                             std::to_string(m_.cols()) + " on space " + space_.describe());
        }
    }

    static DensityOperator from_pure(const PureState &psi) {
        const Vector &a = psi.amplitudes();
        return DensityOperator(psi.space(), a * a.adjoint());
    }

    static DensityOperator maximally_mixed(const CompositeSpace &space) {
        const auto n = static_cast<Eigen::Index>(space.total_dim());
        return DensityOperator(space, Matrix::Identity(n, n) / static_cast<double>(n));
    }

    const CompositeSpace &space() const { return space_; }
    const Matrix &matrix() const { return m_; }
    std::size_t dim() const { return space_.total_dim(); }

    cplx element(std::string_view row, std::string_view col) const {
        return m_(static_cast<Eigen::Index>(detail::pattern_index(space_, row)),
                  static_cast<Eigen::Index>(detail::pattern_index(space_, col)));
    }

  private:
    CompositeSpace space_;
    Matrix m_;
};

/// Convex combination sum_k w_k rho_k over a common space.
inline DensityOperator mixture(std::span<const std::pair<double, DensityOperator>> terms) {
    if (terms.empty()) {
        throw ShapeError("empty mixture");
    }
    const auto &space = terms.front().second.space();
    Matrix m = Matrix::Zero(terms.front().second.matrix().rows(), terms.front().second.matrix().cols());
    for (const auto &[w, rho] : terms) {
        if (!(rho.space() == space)) {
            throw ShapeError("mixture components live on different spaces");
        }
        m += w * rho.matrix();
    }
    return DensityOperator(space, std::move(m));
}

struct Diagnostics {
    double hermiticity_residual = 0.0;
    double trace_residual = 0.0;
    double min_eigenvalue = 0.0;
    bool hermitian = true;
    bool unit_trace = true;
    bool positive = true;

    bool ok() const { return hermitian && unit_trace && positive; }
};

/// Hermiticity residual max|rho - rho^dagger|, trace residual |Tr rho - 1| and
/// the minimum eigenvalue of the hermitian part, each flagged against 1e-10.
inline Diagnostics validate(const DensityOperator &rho) {
    const Matrix &m = rho.matrix();
    Diagnostics d;
    d.hermiticity_residual = (m - m.adjoint()).cwiseAbs().maxCoeff();
    d.trace_residual = std::abs(m.trace() - cplx(1.0, 0.0));
    Matrix herm = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
    d.min_eigenvalue = es.eigenvalues().minCoeff();
    d.hermitian = d.hermiticity_residual <= kValidityTol;
    d.unit_trace = d.trace_residual <= kValidityTol;
    d.positive = d.min_eigenvalue >= -kValidityTol;
    return d;
}

inline void require_valid(const DensityOperator &rho, std::string_view context) {
    auto d = validate(rho);
    if (!d.ok()) {
        throw InvariantViolation(std::string(context) + ": invalid density operator on " + rho.space().describe() +
                                 " (hermiticity " + std::to_string(d.hermiticity_residual) + ", trace " +
                                 std::to_string(d.trace_residual) + ", min eigenvalue " +
                                 std::to_string(d.min_eigenvalue) + ")");
    }
}

/// Kronecker product; the result's factors are the arguments' factors in order.
inline PureState tensor(const PureState &x, const PureState &y) {
    auto space = x.space().concat(y.space());
    const Vector &a = x.amplitudes();
    const Vector &b = y.amplitudes();
    Vector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        out.segment(i * b.size(), b.size()) = a(i) * b;
    }
    if (x.unnormalized_flag() || y.unnormalized_flag()) {
        return PureState::unnormalized(std::move(space), std::move(out));
    }
    return PureState(std::move(space), std::move(out));
}

inline PureState tensor(std::span<const PureState> states) {
    if (states.empty()) {
        throw ShapeError("tensor of an empty list");
    }
    PureState acc = states.front();
    for (std::size_t k = 1; k < states.size(); ++k) {
        acc = tensor(acc, states[k]);
    }
    return acc;
}

inline PureState tensor(std::initializer_list<PureState> states) {
    return tensor(std::span<const PureState>(states.begin(), states.size()));
}

inline Matrix kron(const Matrix &a, const Matrix &b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

inline DensityOperator tensor(const DensityOperator &x, const DensityOperator &y) {
    return DensityOperator(x.space().concat(y.space()), kron(x.matrix(), y.matrix()));
}

/// Same state with its factors permuted into `order` (a permutation of the labels).
inline PureState reorder(const PureState &psi, std::span<const std::string> order) {
    const auto &src = psi.space();
    if (order.size() != src.num_factors()) {
        throw ShapeError("reorder needs every factor of " + src.describe());
    }
    auto dst = src.select(order);
    std::vector<std::size_t> perm;
    for (const auto &l : order) {
        perm.push_back(src.position(l));
    }
    Vector out(psi.amplitudes().size());
    std::vector<std::size_t> dst_digits(order.size());
    for (std::size_t i = 0; i < src.total_dim(); ++i) {
        auto ds = src.digits(i);
        for (std::size_t k = 0; k < perm.size(); ++k) {
            dst_digits[k] = ds[perm[k]];
        }
        out(static_cast<Eigen::Index>(dst.index(dst_digits))) = psi.amplitudes()(static_cast<Eigen::Index>(i));
    }
    if (psi.unnormalized_flag()) {
        return PureState::unnormalized(std::move(dst), std::move(out));
    }
    return PureState(std::move(dst), std::move(out));
}

/**
 * Reduced density operator on `keep`.
 *
 * The result's factors are the kept factors in their original relative
 * order, whatever order `keep` lists them in.
 */
inline DensityOperator partial_trace(const DensityOperator &rho, std::span<const std::string> keep) {
    if (keep.empty()) {
        throw ShapeError("partial_trace must keep at least one subsystem");
    }
    const auto &space = rho.space();
    auto ordered = detail::in_space_order(space, keep);
    auto split = detail::split_indices(space, ordered);
    const auto n = static_cast<Eigen::Index>(split.inner_dim);
    Matrix out = Matrix::Zero(n, n);
    const Matrix &m = rho.matrix();
    const auto d = space.total_dim();
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            if (split.outer[i] == split.outer[j]) {
                out(static_cast<Eigen::Index>(split.inner[i]), static_cast<Eigen::Index>(split.inner[j])) +=
                    m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            }
        }
    }
    return DensityOperator(space.select(ordered), std::move(out));
}

inline DensityOperator partial_trace(const DensityOperator &rho, std::initializer_list<std::string> keep) {
    return partial_trace(rho, std::span<const std::string>(keep.begin(), keep.size()));
}

/// Tr(rho^2).
inline double purity(const DensityOperator &rho) {
    const Matrix &m = rho.matrix();
    // Tr(m m) = sum_ij m_ij m_ji
    return (m.cwiseProduct(m.transpose())).sum().real();
}

/**
 * Sum of |rho_ij| over pairs of product-basis states that differ on at least
 * one of the factors in `labels`. With every label listed this is the full
 * off-diagonal l1 norm.
 */
inline double coherence_norm(const DensityOperator &rho, std::span<const std::string> labels) {
    const auto &space = rho.space();
    auto split = detail::split_indices(space, labels);
    const Matrix &m = rho.matrix();
    double total = 0.0;
    for (std::size_t i = 0; i < space.total_dim(); ++i) {
        for (std::size_t j = 0; j < space.total_dim(); ++j) {
            if (split.inner[i] != split.inner[j]) {
                total += std::abs(m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
            }
        }
    }
    return total;
}

inline double coherence_norm(const DensityOperator &rho, std::initializer_list<std::string> labels) {
    return coherence_norm(rho, std::span<const std::string>(labels.begin(), labels.size()));
}

inline double coherence_norm(const DensityOperator &rho) {
    auto labels = rho.space().labels();
    return coherence_norm(rho, labels);
}

/**
 * Hermitian operator with spectrum in {+1, -1}. Its space names the factors
 * it acts on; expectation() embeds it with identity on everything else.
 */
class DichotomicObservable {
  public:
    DichotomicObservable(CompositeSpace space, Matrix matrix) : space_(std::move(space)), m_(std::move(matrix)) {
        const auto n = static_cast<Eigen::Index>(space_.total_dim());
        if (m_.rows() != n || m_.cols() != n) {
            throw ShapeError("observable matrix does not match " + space_.describe());
        }
        double herm = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
        double square = (m_ * m_ - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
        if (herm > kValidityTol || square > kValidityTol) {
            throw InvariantViolation("observable on " + space_.describe() + " is not dichotomic (hermiticity " +
                                     std::to_string(herm) + ", |M^2 - I| " + std::to_string(square) + ")");
        }
    }

    const CompositeSpace &space() const { return space_; }
    const Matrix &matrix() const { return m_; }

    /// Same matrix acting on differently named factors of the same dims.
    DichotomicObservable relabel(std::span<const std::string> labels) const {
        if (labels.size() != space_.num_factors()) {
            throw ShapeError("relabel needs one label per factor");
        }
        std::vector<Factor> fs;
        for (std::size_t k = 0; k < labels.size(); ++k) {
            fs.push_back({labels[k], space_.factors()[k].dim});
        }
        return DichotomicObservable(CompositeSpace(std::move(fs)), m_);
    }

    /// Projector onto the +1 (sign > 0) or -1 eigenspace.
    Matrix projector(int sign) const {
        const auto n = m_.rows();
        return 0.5 * (Matrix::Identity(n, n) + (sign > 0 ? 1.0 : -1.0) * m_);
    }

  private:
    CompositeSpace space_;
    Matrix m_;
};

inline Matrix pauli_matrix(char axis) {
    Matrix m(2, 2);
    switch (axis) {
    case 'x':
        m << 0, 1, 1, 0;
        break;
    case 'y':
        m << 0, cplx(0, -1), cplx(0, 1), 0;
        break;
    case 'z':
        m << 1, 0, 0, -1;
        break;
    default:
        throw ShapeError(std::string("unknown Pauli axis '") + axis + "'");
    }
    return m;
}

inline DichotomicObservable pauli(char axis, const std::string &label) {
    return DichotomicObservable(CompositeSpace::qubits({label}), pauli_matrix(axis));
}

/// A (x) B on the union of their factors; the product is again dichotomic.
inline DichotomicObservable tensor(const DichotomicObservable &a, const DichotomicObservable &b) {
    return DichotomicObservable(a.space().concat(b.space()), kron(a.matrix(), b.matrix()));
}

/// Tr(rho (op on `on`) (x) I) for a square matrix acting on the listed factors.
inline cplx expectation_of(const DensityOperator &rho, const Matrix &op, std::span<const std::string> on) {
    auto split = detail::split_indices(rho.space(), on);
    if (op.rows() != static_cast<Eigen::Index>(split.inner_dim) || op.cols() != op.rows()) {
        throw ShapeError("operator of size " + std::to_string(op.rows()) + " does not act on " +
                         rho.space().select(on).describe());
    }
    const Matrix &m = rho.matrix();
    cplx acc = 0.0;
    const auto d = rho.space().total_dim();
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            if (split.outer[i] == split.outer[j]) {
                acc += op(static_cast<Eigen::Index>(split.inner[i]), static_cast<Eigen::Index>(split.inner[j])) *
                       m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
            }
        }
    }
    return acc;
}

/// (op on `on`) (x) I applied to a state vector. The result is flagged
/// unnormalized whenever op is not unitary on the state.
inline PureState apply_local(const Matrix &op, const PureState &psi, std::span<const std::string> on) {
    auto split = detail::split_indices(psi.space(), on);
    if (op.rows() != static_cast<Eigen::Index>(split.inner_dim) || op.cols() != op.rows()) {
        throw ShapeError("operator of size " + std::to_string(op.rows()) + " does not act on " +
                         psi.space().select(on).describe());
    }
    const auto d = psi.space().total_dim();
    // Group flat indices by their outer value so each block is a small mat-vec.
    std::vector<std::vector<std::size_t>> blocks(split.outer_dim, std::vector<std::size_t>(split.inner_dim));
    for (std::size_t i = 0; i < d; ++i) {
        blocks[split.outer[i]][split.inner[i]] = i;
    }
    const Vector &a = psi.amplitudes();
    Vector out = Vector::Zero(a.size());
    for (const auto &blk : blocks) {
        for (std::size_t r = 0; r < blk.size(); ++r) {
            cplx acc = 0.0;
            for (std::size_t c = 0; c < blk.size(); ++c) {
                acc += op(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) *
                       a(static_cast<Eigen::Index>(blk[c]));
            }
            out(static_cast<Eigen::Index>(blk[r])) = acc;
        }
    }
    return PureState::unnormalized(psi.space(), std::move(out));
}

/// <obs> with the observable placed on factors `on` of rho's space.
inline double expectation(const DensityOperator &rho, const DichotomicObservable &obs,
                          std::span<const std::string> on) {
    if (on.size() != obs.space().num_factors()) {
        throw ShapeError("observable on " + obs.space().describe() + " cannot be placed on " +
                         std::to_string(on.size()) + " factors");
    }
    for (std::size_t k = 0; k < on.size(); ++k) {
        if (rho.space().dim(on[k]) != obs.space().factors()[k].dim) {
            throw ShapeError("dimension mismatch placing observable on '" + on[k] + "'");
        }
    }
    return expectation_of(rho, obs.matrix(), on).real();
}

/// <obs> on the factors named by the observable's own space.
inline double expectation(const DensityOperator &rho, const DichotomicObservable &obs) {
    auto on = obs.space().labels();
    return expectation(rho, obs, on);
}

}  // namespace friendsim
