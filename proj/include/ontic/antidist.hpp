/// Antidistinguishability machinery.
///
/// A set of preparations is antidistinguishable when some experiment's
/// every outcome has zero probability under at least one member: whatever
/// the outcome, it rules one preparation out.  This module provides
/// certificate verification, the explicit 4-outcome measurement for the
/// {|0>, |+>} product quadruple, a numerical POVM feasibility search for
/// general small sets, and the exact pairwise-overlap criterion for
/// triples.  Certificates are self-certifying: nothing downstream trusts
/// the search, only the verified numbers.

#pragma once

#include <map>
#include <optional>
#include <random>

#include "ontic/omodel.hpp"

namespace ontic {

struct AntidistCertificate {
    std::vector<PureState> states;
    Experiment experiment;
    std::map<std::string, int> assignment;   // outcome label -> precluded state index
    std::vector<double> preclusion_values;   // born prob of the precluded state, outcome order

    AntidistCertificate(std::vector<PureState> s, Experiment e,
                        std::map<std::string, int> a)
        : states(std::move(s)), experiment(std::move(e)), assignment(std::move(a)) {
        detail::require(!states.empty(), "AntidistCertificate: no states");
        for (const auto& o : experiment.outcomes()) {
            auto it = assignment.find(o.label);
            detail::require(it != assignment.end(),
                            "AntidistCertificate: outcome '" + o.label + "' unassigned");
            detail::require(it->second >= 0 &&
                                it->second < static_cast<int>(states.size()),
                            "AntidistCertificate: assignment index out of range");
            preclusion_values.push_back(born_probability(
                states[static_cast<std::size_t>(it->second)], experiment, o.label));
        }
    }
};

struct CertificateCheck {
    bool ok = false;
    double max_preclusion = 0.0;
};

/// True iff every outcome's probability on its precluded preparation is at
/// most tol.  POVM validity and assignment coverage are enforced by the
/// Experiment and AntidistCertificate constructors.
inline CertificateCheck verify_certificate(const AntidistCertificate& c, double tol) {
    CertificateCheck out;
    for (double v : c.preclusion_values) out.max_preclusion = std::max(out.max_preclusion, v);
    out.ok = out.max_preclusion <= tol;
    return out;
}

/// The explicit entangled 4-outcome basis antidistinguishing
/// {|00>, |0+>, |+0>, |++>}:
///   xi1 = (|0>|1> + |1>|0>)/sqrt2     rules out |00>
///   xi2 = (|0>|-> + |1>|+>)/sqrt2     rules out |0+>
///   xi3 = (|+>|1> + |->|0>)/sqrt2     rules out |+0>
///   xi4 = (|+>|-> + |->|+>)/sqrt2     rules out |++>
/// Validity is established by verification at construction, not assumed.
inline AntidistCertificate pbr_measurement() {
    const PureState z0 = ket0(), z1 = ket1(), xp = ket_plus(), xm = ket_minus();
    auto pair_sum = [](const PureState& a1, const PureState& b1, const PureState& a2,
                       const PureState& b2) {
        CVector v = tensor(a1, b1).amplitudes() + tensor(a2, b2).amplitudes();
        return PureState::normalized(std::move(v));
    };
    const PureState xi1 = pair_sum(z0, z1, z1, z0);
    const PureState xi2 = pair_sum(z0, xm, z1, xp);
    const PureState xi3 = pair_sum(xp, z1, xm, z0);
    const PureState xi4 = pair_sum(xp, xm, xm, xp);

    Experiment e = projective_experiment(
        {{"xi1", xi1}, {"xi2", xi2}, {"xi3", xi3}, {"xi4", xi4}});
    std::vector<PureState> states{tensor(z0, z0), tensor(z0, xp), tensor(xp, z0),
                                  tensor(xp, xp)};
    AntidistCertificate cert(std::move(states), std::move(e),
                             {{"xi1", 0}, {"xi2", 1}, {"xi3", 2}, {"xi4", 3}});
    const auto check = verify_certificate(cert, 1e-10);
    detail::require(check.ok, "pbr_measurement: construction failed self-verification");
    return cert;
}

/// Exact antidistinguishability criterion for a triple of pure states in
/// terms of the pairwise squared overlaps a = |<1|2>|^2, b = |<1|3>|^2,
/// c = |<2|3>|^2: antidistinguishable iff a + b + c < 1 and
/// (1 - a - b - c)^2 >= 4abc.  Boundary equality counts as
/// antidistinguishable (the mutually-unbiased d = 4 triples sit exactly
/// there); the equality clause carries a small slack for inputs computed
/// in floating point.
inline bool triple_criterion(double a, double b, double c) {
    detail::require(a >= 0.0 && a <= 1.0 && b >= 0.0 && b <= 1.0 && c >= 0.0 && c <= 1.0,
                    "triple_criterion: overlaps outside [0,1]");
    const double s = a + b + c;
    if (!(s < 1.0)) return false;
    return (1.0 - s) * (1.0 - s) + 1e-12 >= 4.0 * a * b * c;
}

namespace adetail {

/// Orthonormal basis of the span, via modified Gram-Schmidt with a rank cut.
inline CMatrix span_basis(const std::vector<PureState>& states, double cut = 1e-9) {
    const int d = states.front().dim();
    CMatrix q(d, static_cast<int>(states.size()));
    int r = 0;
    for (const auto& s : states) {
        CVector v = s.amplitudes();
        for (int k = 0; k < r; ++k) v -= q.col(k).dot(v) * q.col(k);
        const double n = v.norm();
        if (n > cut) {
            q.col(r) = v / n;
            ++r;
        }
    }
    return q.leftCols(r);
}

inline CMatrix polar_unitary(const CMatrix& v) {
    // closest unitary to v: v (v^dagger v)^{-1/2}
    Eigen::SelfAdjointEigenSolver<CMatrix> es(v.adjoint() * v);
    CVector inv_sqrt(es.eigenvalues().size());
    for (Eigen::Index i = 0; i < inv_sqrt.size(); ++i) {
        const double ev = std::max(es.eigenvalues()(i), 1e-300);
        inv_sqrt(i) = 1.0 / std::sqrt(ev);
    }
    return v * es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().adjoint();
}

inline CMatrix psd_clip(const CMatrix& h) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (h + h.adjoint()));
    CVector clipped(es.eigenvalues().size());
    for (Eigen::Index i = 0; i < clipped.size(); ++i)
        clipped(i) = std::max(es.eigenvalues()(i), 0.0);
    return es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().adjoint();
}

inline CMatrix inv_sqrt_psd(const CMatrix& s, double floor_ev) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(s);
    CVector val(es.eigenvalues().size());
    for (Eigen::Index i = 0; i < val.size(); ++i)
        val(i) = 1.0 / std::sqrt(std::max(es.eigenvalues()(i), floor_ev));
    return es.eigenvectors() * val.asDiagonal() * es.eigenvectors().adjoint();
}

inline CMatrix random_unitary(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    CMatrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = Complex(g(rng), g(rng));
    Eigen::HouseholderQR<CMatrix> qr(a);
    CMatrix q = qr.householderQ();
    return q;
}

/// One Newton step on the unitary manifold toward diag(Psi^dag U) = 0:
/// linearize U -> U(I + A) in an anti-Hermitian A, solve the least-norm
/// system for the preclusion residuals, re-unitarize by polar projection.
inline void preclusion_newton_step(const CMatrix& psis, CMatrix& u) {
    const int n = static_cast<int>(u.cols());
    const CMatrix gamma = u.adjoint() * psis; // gamma.col(k) = U^dag psi_k
    const int n_unknowns = n * n;             // n imag diagonals + C(n,2) complex
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * n, n_unknowns);
    Eigen::VectorXd rhs(2 * n);
    // sequential real-index layout: n imaginary diagonals first, then the
    // (Re, Im) pairs of the upper triangle
    std::vector<std::vector<int>> upper(static_cast<std::size_t>(n),
                                        std::vector<int>(static_cast<std::size_t>(n), -1));
    {
        int c = n;
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b) {
                upper[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = c;
                c += 2;
            }
    }
    for (int k = 0; k < n; ++k) {
        const Complex r = psis.col(k).dot(u.col(k));
        rhs(2 * k) = -r.real();
        rhs(2 * k + 1) = -r.imag();
        for (int j = 0; j < n; ++j) {
            const Complex g = std::conj(gamma(j, k));
            if (j == k) { // A(k,k) = i d_k
                m(2 * k, k) += -g.imag();
                m(2 * k + 1, k) += g.real();
            } else if (j < k) { // A(j,k) = u_jk
                const int v = upper[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
                m(2 * k, v) += g.real();
                m(2 * k, v + 1) += -g.imag();
                m(2 * k + 1, v) += g.imag();
                m(2 * k + 1, v + 1) += g.real();
            } else { // A(j,k) = -conj(u_kj)
                const int v = upper[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
                m(2 * k, v) += -g.real();
                m(2 * k, v + 1) += -g.imag();
                m(2 * k + 1, v) += -g.imag();
                m(2 * k + 1, v + 1) += g.real();
            }
        }
    }
    const Eigen::VectorXd x = m.completeOrthogonalDecomposition().solve(rhs);
    CMatrix a = CMatrix::Zero(n, n);
    for (int k = 0; k < n; ++k) a(k, k) = Complex(0.0, x(k));
    for (int p = 0; p < n; ++p)
        for (int q = p + 1; q < n; ++q) {
            const int v = upper[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)];
            const Complex e(x(v), x(v + 1));
            a(p, q) = e;
            a(q, p) = -std::conj(e);
        }
    u = polar_unitary(u + u * a);
}

/// Finds a unitary whose k-th column is orthogonal to psi_k, when one
/// exists: alternating projection (column deflation + polar snap-back) to
/// reach the basin, then Newton steps to machine precision.
inline std::optional<CMatrix> fit_preclusion_unitary(const CMatrix& psis, int max_iters,
                                                     double amp_tol, std::mt19937_64& rng) {
    const int n = static_cast<int>(psis.cols());
    CMatrix u = random_unitary(n, rng);
    auto residual = [&]() {
        double worst = 0.0;
        for (int k = 0; k < n; ++k)
            worst = std::max(worst, std::abs(psis.col(k).dot(u.col(k))));
        return worst;
    };
    int budget = max_iters;
    for (int outer = 0; outer < 20 && budget > 0; ++outer) {
        for (int it = 0; it < 150 && budget > 0; ++it, --budget) {
            if (residual() < 1e-3) break;
            CMatrix v = u;
            for (int k = 0; k < n; ++k)
                v.col(k) -= psis.col(k).dot(v.col(k)) * psis.col(k);
            u = polar_unitary(v);
        }
        for (int nt = 0; nt < 10 && budget > 0; ++nt, --budget) {
            if (residual() <= amp_tol) return u;
            preclusion_newton_step(psis, u);
        }
        if (residual() <= amp_tol) return u;
    }
    return residual() <= amp_tol ? std::optional<CMatrix>(u) : std::nullopt;
}

/// Alternating projections over general POVMs: each effect is projected
/// onto {X >= 0, X psi_k = 0}, then the family is shifted back onto the
/// completeness plane.  A final symmetric normalization S^{-1/2} E S^{-1/2}
/// restores completeness exactly; since E psi = 0 at that point, the
/// preclusion damage is quadratic in the remaining completeness error.
inline std::optional<std::vector<CMatrix>> fit_preclusion_povm(
    const std::vector<CVector>& psis, int dim, int max_iters, double plane_tol,
    std::mt19937_64& rng) {
    const int n = static_cast<int>(psis.size());
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<CMatrix> e(static_cast<std::size_t>(n));
    for (auto& ek : e) {
        CMatrix a(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) a(i, j) = Complex(g(rng), g(rng));
        ek = psd_clip(a * a.adjoint() / dim + CMatrix::Identity(dim, dim) / n);
    }
    const CMatrix id = CMatrix::Identity(dim, dim);
    for (int it = 0; it < max_iters; ++it) {
        for (int k = 0; k < n; ++k) {
            const CVector& psi = psis[static_cast<std::size_t>(k)];
            CMatrix p = id - psi * psi.adjoint();
            e[static_cast<std::size_t>(k)] =
                psd_clip(p * e[static_cast<std::size_t>(k)] * p);
        }
        CMatrix s = CMatrix::Zero(dim, dim);
        for (const auto& ek : e) s += ek;
        const double dev = (s - id).cwiseAbs().maxCoeff();
        if (dev <= plane_tol) return e;
        const CMatrix shift = (id - s) / n;
        for (auto& ek : e) ek += shift;
    }
    return std::nullopt;
}

} // namespace adetail

/// Searches for an antidistinguishing experiment for the given states.
/// On success the returned certificate has passed verify_certificate at
/// tol; "not found" (nullopt) carries no claim of impossibility.
inline std::optional<AntidistCertificate> search_antidist(
    const std::vector<PureState>& states, int max_iters = 2000, double tol = 1e-9,
    std::uint64_t seed = 42, int restarts = 10) {
    const std::size_t n = states.size();
    if (n < 2) return std::nullopt; // a lone preparation can never be excluded
    detail::require(n <= 8, "search_antidist: too many states");
    const int dim = states.front().dim();
    detail::require(dim <= 16, "search_antidist: dimension too large");
    for (const auto& s : states)
        detail::require(s.dim() == dim, "search_antidist: dimension mismatch");

    const CMatrix q = adetail::span_basis(states);
    const int rank = static_cast<int>(q.cols());
    std::mt19937_64 rng(seed);

    auto certify = [&](const std::vector<CMatrix>& effects)
        -> std::optional<AntidistCertificate> {
        std::vector<Outcome> outs;
        std::map<std::string, int> assign;
        for (std::size_t k = 0; k < effects.size(); ++k) {
            const std::string label = "o" + std::to_string(k);
            outs.push_back({label, effects[k]});
            assign[label] = static_cast<int>(k);
        }
        try {
            AntidistCertificate cert(states, Experiment(dim, std::move(outs)),
                                     std::move(assign));
            if (verify_certificate(cert, tol).ok) return cert;
        } catch (const std::invalid_argument&) {
            // numerically invalid POVM: treat as a failed attempt
        }
        return std::nullopt;
    };

    for (int attempt = 0; attempt < restarts; ++attempt) {
        if (static_cast<int>(n) == rank) {
            // orthonormal preclusion basis of the span; the complement of the
            // span annihilates every state and is absorbed into outcome 0
            CMatrix psis_in_span(rank, rank);
            for (std::size_t k = 0; k < n; ++k)
                psis_in_span.col(static_cast<int>(k)) =
                    q.adjoint() * states[k].amplitudes();
            for (int k = 0; k < rank; ++k)
                psis_in_span.col(k).normalize();
            auto u = adetail::fit_preclusion_unitary(psis_in_span, max_iters,
                                                     std::sqrt(tol) * 0.03, rng);
            if (u) {
                std::vector<CMatrix> effects;
                for (int k = 0; k < rank; ++k) {
                    const CVector uk = q * u->col(k);
                    effects.push_back(uk * uk.adjoint());
                }
                effects[0] += CMatrix::Identity(dim, dim) - q * q.adjoint();
                if (auto cert = certify(effects)) return cert;
            }
        }
        // general fallback: alternating projections over POVMs
        std::vector<CVector> psis;
        for (const auto& s : states) psis.push_back(s.amplitudes());
        auto povm = adetail::fit_preclusion_povm(psis, dim, max_iters, 1e-6, rng);
        if (povm) {
            CMatrix s = CMatrix::Zero(dim, dim);
            for (const auto& ek : *povm) s += ek;
            const CMatrix w = adetail::inv_sqrt_psd(s, 1e-12);
            std::vector<CMatrix> effects;
            for (const auto& ek : *povm) effects.push_back(w * ek * w);
            if (auto cert = certify(effects)) return cert;
        }
    }
    return std::nullopt;
}

/// Preparation-pair names in the quadruple ordering used throughout:
/// index = 2*(a is phi) + (b is phi).
inline const std::vector<std::string>& pbr_pair_names() {
    static const std::vector<std::string> names{"psi,psi", "psi,phi", "phi,psi",
                                                "phi,phi"};
    return names;
}

/// The product quadruple for psi = |0>, phi = |+> together with the explicit
/// antidistinguishing experiment, as a fragment named by preparation pair.
inline Fragment pbr_fragment() {
    const auto cert = pbr_measurement();
    std::map<std::string, PureState> preps;
    for (std::size_t i = 0; i < 4; ++i) preps.emplace(pbr_pair_names()[i], cert.states[i]);
    std::map<std::string, Experiment> exps;
    exps.emplace("pbr", cert.experiment);
    return Fragment(4, std::move(preps), std::move(exps));
}

struct NullOverlapCheck {
    bool ok = false;
    std::size_t witness_lambda = 0; // meaningful when ok is false
    double witness_mass = 0.0;      // smallest preparation weight at the witness
};

/// Checks the entailment "antidistinguishable => null joint overlap" inside
/// a model: given a verified certificate whose experiment the model
/// reproduces, no ontic state may carry weight under all listed
/// preparations.  A false result is a model-inconsistency finding.
inline NullOverlapCheck null_joint_overlap_check(const OntModel& m,
                                                 const AntidistCertificate& c,
                                                 const std::vector<std::string>& prep_names,
                                                 const Tolerances& tol = default_tolerances()) {
    detail::require(prep_names.size() == c.states.size(),
                    "null_joint_overlap_check: preparation list does not match states");

    // locate the model experiment carrying the certificate's outcome labels
    const ExperimentResponses* responses = nullptr;
    std::string ename;
    for (const auto& [name, resp] : m.experiments) {
        if (resp.size() != c.experiment.n_outcomes()) continue;
        bool all = true;
        for (const auto& o : c.experiment.outcomes()) {
            bool found = false;
            for (const auto& [label, f] : resp)
                if (label == o.label) { found = true; break; }
            if (!found) { all = false; break; }
        }
        if (all) {
            responses = &resp;
            ename = name;
            break;
        }
    }
    detail::require(responses != nullptr,
                    "null_joint_overlap_check: model does not declare the experiment");

    for (std::size_t i = 0; i < prep_names.size(); ++i)
        for (const auto& o : c.experiment.outcomes()) {
            const double model_p = predicted_probability(m, prep_names[i], ename, o.label);
            const double born_p = born_probability(c.states[i], c.experiment, o.label);
            detail::require(std::abs(model_p - born_p) <= 1e-8,
                            "null_joint_overlap_check: model does not reproduce the "
                            "experiment for preparation '" + prep_names[i] + "'");
        }

    NullOverlapCheck out;
    out.ok = true;
    for (std::size_t l = 0; l < m.lambda_size; ++l) {
        double least = std::numeric_limits<double>::infinity();
        for (const auto& name : prep_names)
            least = std::min(least, m.preparation(name)[l]);
        if (least > 1e-10) {
            out.ok = false;
            out.witness_lambda = l;
            out.witness_mass = least;
            return out;
        }
    }
    (void)tol;
    return out;
}

} // namespace ontic
