/// Quantum-side primitives: pure states, outcome-labelled POVM experiments,
/// fragments, Born probabilities, and the pairwise distinguishability /
/// overlap metrics for pure states.
///
/// Everything operates on small dense complex vectors and matrices
/// (dimension <= 64); all values are immutable once constructed.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "ontic/tolerances.hpp"

namespace ontic {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

namespace detail {

inline bool is_finite(const Complex& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

} // namespace detail

/// A unit complex vector. Normalization is enforced at construction.
class PureState {
public:
    explicit PureState(CVector amplitudes, const Tolerances& tol = default_tolerances())
        : amps_(std::move(amplitudes)) {
        detail::require(amps_.size() > 0, "PureState: empty amplitude vector");
        for (Eigen::Index i = 0; i < amps_.size(); ++i)
            detail::require(detail::is_finite(amps_[i]), "PureState: non-finite amplitude");
        const double n2 = amps_.squaredNorm();
        detail::require(std::abs(n2 - 1.0) <= tol.state_norm,
                        "PureState: squared norm " + std::to_string(n2) + " is not 1");
    }

    /// Normalizes the given vector first; convenient for hand-written kets.
    static PureState normalized(CVector v) {
        const double n = v.norm();
        detail::require(n > 0.0, "PureState::normalized: zero vector");
        return PureState(v / n);
    }

    int dim() const { return static_cast<int>(amps_.size()); }
    const CVector& amplitudes() const { return amps_; }
    Complex amplitude(int i) const { return amps_(i); }

private:
    CVector amps_;
};

inline PureState basis_state(int dim, int k) {
    CVector v = CVector::Zero(dim);
    v(k) = 1.0;
    return PureState(std::move(v));
}

inline PureState ket0() { return basis_state(2, 0); }
inline PureState ket1() { return basis_state(2, 1); }

inline PureState ket_plus() {
    CVector v(2);
    v << 1.0, 1.0;
    return PureState::normalized(std::move(v));
}

inline PureState ket_minus() {
    CVector v(2);
    v << 1.0, -1.0;
    return PureState::normalized(std::move(v));
}

inline Complex inner_product(const PureState& a, const PureState& b) {
    detail::require(a.dim() == b.dim(), "inner_product: dimension mismatch");
    return a.amplitudes().dot(b.amplitudes()); // Eigen's dot conjugates the left argument
}

/// Tensor product with the left factor as the slow (row-major) index:
/// (a (x) b)[i*db + j] = a[i] * b[j].
inline PureState tensor(const PureState& a, const PureState& b) {
    const int da = a.dim(), db = b.dim();
    CVector v(static_cast<Eigen::Index>(da) * db);
    for (int i = 0; i < da; ++i)
        for (int j = 0; j < db; ++j)
            v(static_cast<Eigen::Index>(i) * db + j) = a.amplitude(i) * b.amplitude(j);
    return PureState(std::move(v));
}

/// States compared projectively: equal iff |<a|b>| = 1 within tolerance.
inline bool projectively_equal(const PureState& a, const PureState& b,
                               const Tolerances& tol = default_tolerances()) {
    if (a.dim() != b.dim()) return false;
    return std::abs(1.0 - std::abs(inner_product(a, b))) <= tol.phase_equal;
}

/// One outcome of an experiment: a label plus its POVM effect.
struct Outcome {
    std::string label;
    CMatrix effect;
};

/// A finite outcome-labelled POVM.  Construction verifies that each effect
/// is Hermitian and positive (up to slack) and that the effects resolve
/// the identity.
class Experiment {
public:
    Experiment(int dim, std::vector<Outcome> outcomes,
               const Tolerances& tol = default_tolerances())
        : dim_(dim), outcomes_(std::move(outcomes)) {
        detail::require(dim_ > 0, "Experiment: non-positive dimension");
        detail::require(!outcomes_.empty(), "Experiment: no outcomes");
        CMatrix sum = CMatrix::Zero(dim_, dim_);
        for (const auto& o : outcomes_) {
            detail::require(o.effect.rows() == dim_ && o.effect.cols() == dim_,
                            "Experiment: effect '" + o.label + "' has wrong shape");
            const double herm = (o.effect - o.effect.adjoint()).cwiseAbs().maxCoeff();
            detail::require(herm <= tol.hermitian,
                            "Experiment: effect '" + o.label + "' is not Hermitian");
            Eigen::SelfAdjointEigenSolver<CMatrix> es(o.effect, Eigen::EigenvaluesOnly);
            detail::require(es.eigenvalues().minCoeff() >= -tol.effect_min_eig,
                            "Experiment: effect '" + o.label + "' is not positive");
            sum += o.effect;
        }
        const double dev =
            (sum - CMatrix::Identity(dim_, dim_)).cwiseAbs().maxCoeff();
        detail::require(dev <= tol.povm_completeness,
                        "Experiment: effects do not sum to identity (deviation " +
                            std::to_string(dev) + ")");
        for (std::size_t i = 0; i < outcomes_.size(); ++i)
            detail::require(outcome_index(outcomes_[i].label) == static_cast<int>(i),
                            "Experiment: duplicate outcome label '" + outcomes_[i].label + "'");
    }

    int dim() const { return dim_; }
    const std::vector<Outcome>& outcomes() const { return outcomes_; }
    std::size_t n_outcomes() const { return outcomes_.size(); }

    int outcome_index(const std::string& label) const {
        for (std::size_t i = 0; i < outcomes_.size(); ++i)
            if (outcomes_[i].label == label) return static_cast<int>(i);
        return -1;
    }

    const Outcome& outcome(const std::string& label) const {
        const int i = outcome_index(label);
        if (i < 0) throw std::out_of_range("Experiment: unknown outcome '" + label + "'");
        return outcomes_[static_cast<std::size_t>(i)];
    }

private:
    int dim_;
    std::vector<Outcome> outcomes_;
};

/// Convenience: projective measurement onto an orthonormal family of states.
/// If the projectors do not resolve the identity, the remainder is folded
/// into the effect at `absorb_index`.
inline Experiment projective_experiment(const std::vector<std::pair<std::string, PureState>>& kets,
                                        int absorb_index = -1) {
    detail::require(!kets.empty(), "projective_experiment: no kets");
    const int dim = kets.front().second.dim();
    std::vector<Outcome> outs;
    CMatrix sum = CMatrix::Zero(dim, dim);
    for (const auto& [label, ket] : kets) {
        CMatrix p = ket.amplitudes() * ket.amplitudes().adjoint();
        sum += p;
        outs.push_back({label, std::move(p)});
    }
    if (absorb_index >= 0) {
        outs[static_cast<std::size_t>(absorb_index)].effect +=
            CMatrix::Identity(dim, dim) - sum;
    }
    return Experiment(dim, std::move(outs));
}

inline double born_probability(const PureState& s, const Experiment& e,
                               const std::string& outcome) {
    detail::require(s.dim() == e.dim(), "born_probability: dimension mismatch");
    const auto& o = e.outcome(outcome);
    const double p = (s.amplitudes().adjoint() * o.effect * s.amplitudes())(0).real();
    return std::clamp(p, 0.0, 1.0);
}

/// d(psi, phi) = sqrt(1 - |<phi|psi>|^2): the best single-outcome
/// probability gap achievable between the two preparations when every
/// quantum experiment is permitted.
inline double quantum_distinguishability(const PureState& a, const PureState& b) {
    detail::require(a.dim() == b.dim(), "quantum_distinguishability: dimension mismatch");
    const double m = std::abs(inner_product(a, b));
    return std::sqrt(std::max(0.0, 1.0 - std::min(1.0, m) * std::min(1.0, m)));
}

/// omega_Q = 1 - d(psi, phi); the ceiling on how much indistinguishability
/// an ontological model may attribute to distribution overlap.
inline double quantum_overlap(const PureState& a, const PureState& b) {
    return 1.0 - quantum_distinguishability(a, b);
}

/// Success probability of the optimal guess when one of the two states is
/// prepared with equal probability: (1 + d)/2.
inline double optimal_guess_probability(const PureState& a, const PureState& b) {
    return 0.5 * (1.0 + quantum_distinguishability(a, b));
}

/// A named set of preparations and experiments on one Hilbert space: the
/// statistics an ontological model is asked to reproduce.
class Fragment {
public:
    Fragment(int dim, std::map<std::string, PureState> preparations,
             std::map<std::string, Experiment> experiments)
        : dim_(dim), preparations_(std::move(preparations)),
          experiments_(std::move(experiments)) {
        detail::require(dim_ > 0, "Fragment: non-positive dimension");
        for (const auto& [name, s] : preparations_)
            detail::require(s.dim() == dim_, "Fragment: preparation '" + name +
                                                 "' has wrong dimension");
        for (const auto& [name, e] : experiments_)
            detail::require(e.dim() == dim_,
                            "Fragment: experiment '" + name + "' has wrong dimension");
    }

    int dim() const { return dim_; }
    const std::map<std::string, PureState>& preparations() const { return preparations_; }
    const std::map<std::string, Experiment>& experiments() const { return experiments_; }

    const PureState& preparation(const std::string& name) const {
        auto it = preparations_.find(name);
        if (it == preparations_.end())
            throw std::out_of_range("Fragment: unknown preparation '" + name + "'");
        return it->second;
    }

    const Experiment& experiment(const std::string& name) const {
        auto it = experiments_.find(name);
        if (it == experiments_.end())
            throw std::out_of_range("Fragment: unknown experiment '" + name + "'");
        return it->second;
    }

private:
    int dim_;
    std::map<std::string, PureState> preparations_;
    std::map<std::string, Experiment> experiments_;
};

} // namespace ontic
