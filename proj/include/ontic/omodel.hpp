/// Finite ontological models: preparation distributions over a finite ontic
/// space, per-outcome response functions, validity and reproduction checks,
/// the delta / omega metrics, model classification, Bayesian preparation
/// inference, and two reference model generators.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ontic/qcore.hpp"

namespace ontic {

/// Weights over the ontic states, indexed 0..|Lambda|-1.  Deliberately a
/// thin value type: invalid data is representable so that validate_model
/// can report violations instead of refusing construction.
struct FiniteDistribution {
    std::vector<double> weights;

    std::size_t size() const { return weights.size(); }
    double operator[](std::size_t i) const { return weights[i]; }
    double sum() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

    static FiniteDistribution point_mass(std::size_t lambda_size, std::size_t at) {
        FiniteDistribution d;
        d.weights.assign(lambda_size, 0.0);
        d.weights[at] = 1.0;
        return d;
    }
};

/// f_k(lambda) for one outcome, one value per ontic state.
struct ResponseFunction {
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
};

struct OutcomeResponse {
    std::string label;
    ResponseFunction response;
};

using ExperimentResponses = std::vector<OutcomeResponse>;

/// A finite ontological model of some fragment: |Lambda|, one distribution
/// per preparation, and one ordered response list per experiment.  The
/// sigma-algebra is the power set of the finite Lambda, so suprema over
/// measurable sets are finite maxima throughout.
struct OntModel {
    std::size_t lambda_size = 0;
    std::map<std::string, FiniteDistribution> preparations;
    std::map<std::string, ExperimentResponses> experiments;

    const FiniteDistribution& preparation(const std::string& name) const {
        auto it = preparations.find(name);
        if (it == preparations.end())
            throw std::out_of_range("OntModel: unknown preparation '" + name + "'");
        return it->second;
    }

    const ExperimentResponses& experiment(const std::string& name) const {
        auto it = experiments.find(name);
        if (it == experiments.end())
            throw std::out_of_range("OntModel: unknown experiment '" + name + "'");
        return it->second;
    }
};

struct Violation {
    std::string location; // names the preparation / experiment / ontic index
    std::string message;
    double magnitude = 0.0;
};

/// Checks all model invariants; returns the (possibly empty) violation list.
/// Violations are data, not errors: invalid models are legitimate inputs.
inline std::vector<Violation> validate_model(const OntModel& m,
                                             const Tolerances& tol = default_tolerances()) {
    std::vector<Violation> out;
    auto add = [&out](std::string where, std::string what, double mag) {
        out.push_back({std::move(where), std::move(what), mag});
    };

    for (const auto& [name, dist] : m.preparations) {
        if (dist.size() != m.lambda_size) {
            add("preparation '" + name + "'", "length differs from lambda_size",
                static_cast<double>(dist.size()));
            continue;
        }
        for (std::size_t i = 0; i < dist.size(); ++i)
            if (dist[i] < -tol.support)
                add("preparation '" + name + "' lambda " + std::to_string(i),
                    "negative weight", dist[i]);
        const double s = dist.sum();
        if (std::abs(s - 1.0) > tol.dist_norm)
            add("preparation '" + name + "'", "weights do not sum to 1", s - 1.0);
    }

    for (const auto& [name, responses] : m.experiments) {
        for (const auto& [label, f] : responses) {
            if (f.size() != m.lambda_size) {
                add("experiment '" + name + "' outcome '" + label + "'",
                    "length differs from lambda_size", static_cast<double>(f.size()));
                continue;
            }
            for (std::size_t i = 0; i < f.size(); ++i)
                if (f[i] < -tol.response_range || f[i] > 1.0 + tol.response_range)
                    add("experiment '" + name + "' outcome '" + label + "' lambda " +
                            std::to_string(i),
                        "response value outside [0,1]", f[i]);
        }
        for (std::size_t i = 0; i < m.lambda_size; ++i) {
            double s = 0.0;
            bool sized = true;
            for (const auto& [label, f] : responses) {
                if (f.size() != m.lambda_size) { sized = false; break; }
                s += f[i];
            }
            if (sized && std::abs(s - 1.0) > tol.response_sum)
                add("experiment '" + name + "' lambda " + std::to_string(i),
                    "response functions do not sum to 1", s - 1.0);
        }
    }
    return out;
}

/// Expectation of the outcome's response function under the preparation
/// distribution: sum_lambda f_k(lambda) P(lambda).
inline double predicted_probability(const OntModel& m, const std::string& prep,
                                    const std::string& exp, const std::string& outcome) {
    const auto& dist = m.preparation(prep);
    const auto& responses = m.experiment(exp);
    for (const auto& [label, f] : responses) {
        if (label != outcome) continue;
        detail::require(f.size() == dist.size() && dist.size() == m.lambda_size,
                        "predicted_probability: inconsistent lengths");
        double s = 0.0;
        for (std::size_t i = 0; i < m.lambda_size; ++i) s += f[i] * dist[i];
        return s;
    }
    throw std::out_of_range("predicted_probability: unknown outcome '" + outcome + "'");
}

struct DeviationRow {
    std::string preparation;
    std::string experiment;
    std::string outcome;
    double model_p = 0.0;
    double born_p = 0.0;
    double abs_diff = 0.0;
};

struct ReproductionReport {
    bool ok = false;
    double max_deviation = 0.0;
    DeviationRow worst;
    std::vector<DeviationRow> rows; // every (prep, experiment, outcome) triple
};

/// Compares every declared (preparation, experiment, outcome) statistic of
/// the model against the Born probability of the fragment.
inline ReproductionReport reproduces_fragment(const OntModel& m, const Fragment& f,
                                              double tol) {
    ReproductionReport rep;
    for (const auto& [pname, state] : f.preparations()) {
        if (m.preparations.find(pname) == m.preparations.end())
            throw std::invalid_argument("reproduces_fragment: model lacks preparation '" +
                                        pname + "'");
        for (const auto& [ename, experiment] : f.experiments()) {
            if (m.experiments.find(ename) == m.experiments.end())
                throw std::invalid_argument("reproduces_fragment: model lacks experiment '" +
                                            ename + "'");
            for (const auto& o : experiment.outcomes()) {
                DeviationRow row;
                row.preparation = pname;
                row.experiment = ename;
                row.outcome = o.label;
                row.model_p = predicted_probability(m, pname, ename, o.label);
                row.born_p = born_probability(state, experiment, o.label);
                row.abs_diff = std::abs(row.model_p - row.born_p);
                if (row.abs_diff > rep.max_deviation) {
                    rep.max_deviation = row.abs_diff;
                    rep.worst = row;
                }
                rep.rows.push_back(std::move(row));
            }
        }
    }
    rep.ok = rep.max_deviation <= tol;
    return rep;
}

/// Total variation distance; for finite Lambda this is (1/2) sum |p - q|,
/// which equals the supremum of |P(A) - Q(A)| over subsets A.
inline double tv_distance(const FiniteDistribution& p, const FiniteDistribution& q) {
    detail::require(p.size() == q.size(), "tv_distance: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
    return 0.5 * s;
}

/// omega = 1 - delta, defined through tv_distance so the identity
/// omega + delta = 1 holds exactly in floating point.  For normalized
/// distributions it coincides with sum_lambda min(p, q).
inline double classical_overlap(const FiniteDistribution& p, const FiniteDistribution& q) {
    return 1.0 - tv_distance(p, q);
}

inline double min_overlap_mass(const FiniteDistribution& p, const FiniteDistribution& q) {
    detail::require(p.size() == q.size(), "min_overlap_mass: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::min(p[i], q[i]);
    return s;
}

/// Supports disjoint up to the support tolerance; for finite Lambda this is
/// equivalent to delta = 1.
inline bool ontologically_distinct(const FiniteDistribution& p, const FiniteDistribution& q,
                                   const Tolerances& tol = default_tolerances()) {
    detail::require(p.size() == q.size(), "ontologically_distinct: length mismatch");
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] > tol.support && q[i] > tol.support) return false;
    return true;
}

/// Fragment-relative distinguishability: the maximum probability gap over
/// the model's declared experiments and outcomes.  The unrestricted
/// supremum would trivially reach delta on a finite Lambda (indicator
/// responses), which would erase the d-vs-delta distinction, so the
/// experiment list is part of the definition here.
inline double model_distinguishability(const OntModel& m, const std::string& prep1,
                                       const std::string& prep2) {
    m.preparation(prep1);
    m.preparation(prep2);
    double best = 0.0;
    for (const auto& [ename, responses] : m.experiments)
        for (const auto& [label, f] : responses) {
            const double gap = std::abs(predicted_probability(m, prep1, ename, label) -
                                        predicted_probability(m, prep2, ename, label));
            best = std::max(best, gap);
        }
    return best;
}

struct ModelClassification {
    bool psi_ontic = false;
    bool psi_epistemic = false;          // by definition, NOT psi_ontic
    bool pairwise_psi_epistemic = false; // no nonorthogonal distinct pair is ontologically distinct
    bool maximally_psi_epistemic = false;
    std::optional<std::pair<std::string, std::string>> witness;
};

/// Classifies a model of a fragment.  Precondition: the model reproduces
/// the fragment within reproduction_tol (the classification is about the
/// fragment's quantum states, so a non-reproducing model has no standing).
/// The default suits exactly-constructed models; discretized models need
/// the looser tolerance they were built to.
inline ModelClassification classify(const OntModel& m, const Fragment& f,
                                    const Tolerances& tol = default_tolerances(),
                                    double reproduction_tol = 1e-6) {
    const auto rep = reproduces_fragment(m, f, reproduction_tol);
    if (!rep.ok)
        throw std::invalid_argument(
            "classify: model does not reproduce the fragment (max deviation " +
            std::to_string(rep.max_deviation) + ")");

    ModelClassification c;
    c.psi_ontic = true;
    c.pairwise_psi_epistemic = true;
    c.maximally_psi_epistemic = true;
    std::optional<std::pair<std::string, std::string>> overlapping_pair;
    std::optional<std::pair<std::string, std::string>> non_maximal_pair;

    const auto& preps = f.preparations();
    for (auto i = preps.begin(); i != preps.end(); ++i) {
        for (auto j = std::next(i); j != preps.end(); ++j) {
            const auto& pi = m.preparation(i->first);
            const auto& pj = m.preparation(j->first);
            const bool distinct_states = !projectively_equal(i->second, j->second, tol);
            const double inner = std::abs(inner_product(i->second, j->second));
            const bool distinct_supports = ontologically_distinct(pi, pj, tol);

            if (distinct_states && !distinct_supports) {
                c.psi_ontic = false;
                if (!overlapping_pair) overlapping_pair = {i->first, j->first};
            }
            if (distinct_states && inner > tol.phase_equal && distinct_supports)
                c.pairwise_psi_epistemic = false;

            const double delta = tv_distance(pi, pj);
            const double d_quantum = quantum_distinguishability(i->second, j->second);
            if (std::abs(delta - d_quantum) > tol.classification) {
                c.maximally_psi_epistemic = false;
                if (!non_maximal_pair) non_maximal_pair = {i->first, j->first};
            }
        }
    }
    c.psi_epistemic = !c.psi_ontic;
    if (!c.psi_ontic)
        c.witness = overlapping_pair;
    else if (!c.maximally_psi_epistemic)
        c.witness = non_maximal_pair;
    return c;
}

/// Posterior over preparations from one observed outcome:
/// posterior(p) proportional to prior(p) * conditional(p, observed).
inline std::map<std::string, double> bayes_posterior(
    const std::map<std::string, double>& prior,
    const std::map<std::string, std::map<std::string, double>>& conditionals,
    const std::string& observed) {
    std::map<std::string, double> post;
    double total = 0.0;
    for (const auto& [prep, pr] : prior) {
        auto cit = conditionals.find(prep);
        detail::require(cit != conditionals.end(),
                        "bayes_posterior: no conditionals for preparation '" + prep + "'");
        auto oit = cit->second.find(observed);
        detail::require(oit != cit->second.end(),
                        "bayes_posterior: no conditional for outcome '" + observed + "'");
        const double w = pr * oit->second;
        post[prep] = w;
        total += w;
    }
    detail::require(total > 0.0,
                    "bayes_posterior: observed outcome has zero total probability");
    for (auto& [prep, w] : post) w /= total;
    return post;
}

/// Reference psi-ontic model: one ontic state per preparation, deterministic
/// distributions, response values equal to the Born probabilities.
inline OntModel canonical_psi_ontic(const Fragment& f) {
    OntModel m;
    m.lambda_size = f.preparations().size();
    std::size_t idx = 0;
    std::map<std::string, std::size_t> atom_of;
    for (const auto& [name, state] : f.preparations()) {
        atom_of[name] = idx;
        m.preparations[name] = FiniteDistribution::point_mass(m.lambda_size, idx);
        ++idx;
    }
    for (const auto& [ename, experiment] : f.experiments()) {
        ExperimentResponses responses;
        for (const auto& o : experiment.outcomes()) {
            ResponseFunction rf;
            rf.values.assign(m.lambda_size, 0.0);
            for (const auto& [pname, state] : f.preparations())
                rf.values[atom_of[pname]] = born_probability(state, experiment, o.label);
            responses.push_back({o.label, std::move(rf)});
        }
        m.experiments[ename] = std::move(responses);
    }
    return m;
}

// ---------------------------------------------------------------------------
// Discretized qubit model (sphere construction)
// ---------------------------------------------------------------------------

/// Bloch vector of a qubit state.
inline Eigen::Vector3d bloch_vector(const PureState& s) {
    detail::require(s.dim() == 2, "bloch_vector: not a qubit state");
    const Complex a = s.amplitude(0), b = s.amplitude(1);
    const Complex ab = std::conj(a) * b;
    return {2.0 * ab.real(), 2.0 * ab.imag(), std::norm(a) - std::norm(b)};
}

/// Two-outcome projective measurement along a Bloch direction; outcomes
/// labelled "+" and "-".
inline Experiment direction_experiment(const Eigen::Vector3d& n) {
    const Eigen::Vector3d u = n.normalized();
    CMatrix pauli = CMatrix::Zero(2, 2);
    pauli(0, 0) = u.z();
    pauli(1, 1) = -u.z();
    pauli(0, 1) = Complex(u.x(), -u.y());
    pauli(1, 0) = Complex(u.x(), u.y());
    const CMatrix id = CMatrix::Identity(2, 2);
    std::vector<Outcome> outs;
    outs.push_back({"+", 0.5 * (id + pauli)});
    outs.push_back({"-", 0.5 * (id - pauli)});
    return Experiment(2, std::move(outs));
}

/// Deterministic low-discrepancy sample of the unit sphere.
inline std::vector<Eigen::Vector3d> fibonacci_sphere(std::size_t n) {
    std::vector<Eigen::Vector3d> pts;
    pts.reserve(n);
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (std::size_t i = 0; i < n; ++i) {
        const double z = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden * static_cast<double>(i);
        pts.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
    }
    return pts;
}

struct QubitModelAndFragment {
    OntModel model;
    Fragment fragment;
};

/// The hemisphere qubit model on a Fibonacci-sphere sample of the Bloch
/// sphere: preparation weight proportional to max(0, cos angle(psi, lambda)),
/// response for a direction = indicator of its hemisphere.  Reproduces the
/// qubit statistics up to discretization error (about 2e-2 at resolution
/// 1e4, 1e-2 at 1e5) and is the standard d = 2 contrast: its distribution
/// overlaps realize the full quantum overlap.
inline QubitModelAndFragment discretized_qubit_model(
    std::size_t resolution, const std::vector<Eigen::Vector3d>& measurement_net,
    const std::vector<std::pair<std::string, PureState>>& preparations = {
        {"z0", ket0()}, {"x+", ket_plus()}}) {
    detail::require(resolution >= 1000, "discretized_qubit_model: resolution too small");
    detail::require(!measurement_net.empty(), "discretized_qubit_model: empty net");

    const auto sphere = fibonacci_sphere(resolution);

    OntModel m;
    m.lambda_size = resolution;
    std::map<std::string, PureState> frag_preps;
    for (const auto& [name, state] : preparations) {
        const Eigen::Vector3d b = bloch_vector(state);
        FiniteDistribution d;
        d.weights.resize(resolution);
        double total = 0.0;
        for (std::size_t i = 0; i < resolution; ++i) {
            const double w = std::max(0.0, b.dot(sphere[i]));
            d.weights[i] = w;
            total += w;
        }
        for (auto& w : d.weights) w /= total;
        m.preparations[name] = std::move(d);
        frag_preps.emplace(name, state);
    }

    std::map<std::string, Experiment> frag_exps;
    for (std::size_t k = 0; k < measurement_net.size(); ++k) {
        const Eigen::Vector3d dir = measurement_net[k].normalized();
        const std::string ename = "dir_" + std::to_string(k);
        ResponseFunction plus, minus;
        plus.values.resize(resolution);
        minus.values.resize(resolution);
        for (std::size_t i = 0; i < resolution; ++i) {
            const double v = dir.dot(sphere[i]) > 0.0 ? 1.0 : 0.0;
            plus.values[i] = v;
            minus.values[i] = 1.0 - v;
        }
        ExperimentResponses responses;
        responses.push_back({"+", std::move(plus)});
        responses.push_back({"-", std::move(minus)});
        m.experiments[ename] = std::move(responses);
        frag_exps.emplace(ename, direction_experiment(dir));
    }

    return {std::move(m), Fragment(2, std::move(frag_preps), std::move(frag_exps))};
}

} // namespace ontic
