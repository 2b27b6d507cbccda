/// Preparation-independence machinery: joint scenarios over two subsystems,
/// the PIP decomposition checks (Cartesian product structure, ontic
/// parameter independence, independence), the preparation-uninformativeness
/// condition, the theorem verifiers with their epsilon-robustness bounds,
/// N-subsystem determination arrays, and the randomized scenario
/// generators the verifiers are exercised with.
///
/// Conventions fixed here: preparation pairs are named "psi,psi",
/// "psi,phi", "phi,psi", "phi,phi" (index 2*(a is phi) + (b is phi)); all
/// posteriors use the uniform prior over preparation choices; "uniquely
/// determines" means posterior mass at least 1 - 1e-9 on one value.

#pragma once

#include <functional>

#include "ontic/antidist.hpp"
#include "ontic/lp.hpp"

namespace ontic {

// ---------------------------------------------------------------------------
// Scenario types
// ---------------------------------------------------------------------------

/// A two-subsystem preparation scenario over one shared ontic space: an
/// ontological model whose four preparations are keyed by the pair names.
/// No product structure is assumed.
struct JointScenario {
    OntModel model;

    const FiniteDistribution& pair(int index) const {
        return model.preparation(pbr_pair_names()[static_cast<std::size_t>(index)]);
    }
};

inline std::vector<Violation> validate_joint_scenario(const JointScenario& s,
                                                      const Tolerances& tol = default_tolerances()) {
    auto out = validate_model(s.model, tol);
    for (const auto& name : pbr_pair_names())
        if (s.model.preparations.find(name) == s.model.preparations.end())
            out.push_back({"scenario", "missing preparation pair '" + name + "'", 0.0});
    return out;
}

/// A joint scenario whose ontic space is the Cartesian product of two
/// subsystem spaces (the CPA holds by construction).  Joint index layout is
/// row-major with the A index slow: lambda = x * lambda_b_size + y.
struct ProductJointScenario {
    std::size_t lambda_a_size = 0;
    std::size_t lambda_b_size = 0;
    OntModel model;

    std::size_t joint_index(std::size_t x, std::size_t y) const {
        return x * lambda_b_size + y;
    }
};

inline JointScenario flatten(const ProductJointScenario& s) { return {s.model}; }

inline FiniteDistribution marginal_a(const ProductJointScenario& s, const std::string& prep) {
    const auto& joint = s.model.preparation(prep);
    FiniteDistribution out;
    out.weights.assign(s.lambda_a_size, 0.0);
    for (std::size_t x = 0; x < s.lambda_a_size; ++x)
        for (std::size_t y = 0; y < s.lambda_b_size; ++y)
            out.weights[x] += joint[s.joint_index(x, y)];
    return out;
}

inline FiniteDistribution marginal_b(const ProductJointScenario& s, const std::string& prep) {
    const auto& joint = s.model.preparation(prep);
    FiniteDistribution out;
    out.weights.assign(s.lambda_b_size, 0.0);
    for (std::size_t x = 0; x < s.lambda_a_size; ++x)
        for (std::size_t y = 0; y < s.lambda_b_size; ++y)
            out.weights[y] += joint[s.joint_index(x, y)];
    return out;
}

// ---------------------------------------------------------------------------
// Condition checkers
// ---------------------------------------------------------------------------

struct PucCheck {
    bool ok = false;
    double worst_violation = 0.0; // max |Cr(a,b|l) - Cr(a|l) Cr(b|l)|
    std::size_t worst_lambda = 0;
};

/// Preparation Uninformativeness Condition: under the uniform prior over
/// the four preparation pairs, the posterior at every ontic state with
/// positive weight factorizes into independent A and B posteriors, so
/// learning one side's preparation says nothing about the other's.
inline PucCheck check_puc(const JointScenario& s, double tol,
                          const Tolerances& tols = default_tolerances()) {
    PucCheck out;
    out.ok = true;
    for (std::size_t l = 0; l < s.model.lambda_size; ++l) {
        double mass[4];
        double total = 0.0;
        for (int p = 0; p < 4; ++p) {
            mass[p] = s.pair(p)[l];
            total += mass[p];
        }
        if (total <= tols.support) continue;
        const double c_psipsi = mass[0] / total, c_psiphi = mass[1] / total;
        const double c_phipsi = mass[2] / total, c_phiphi = mass[3] / total;
        const double a_psi = c_psipsi + c_psiphi; // Cr(a = psi | lambda)
        const double b_psi = c_psipsi + c_phipsi;
        const double dev = std::max(
            std::max(std::abs(c_psipsi - a_psi * b_psi),
                     std::abs(c_psiphi - a_psi * (1.0 - b_psi))),
            std::max(std::abs(c_phipsi - (1.0 - a_psi) * b_psi),
                     std::abs(c_phiphi - (1.0 - a_psi) * (1.0 - b_psi))));
        if (dev > out.worst_violation) {
            out.worst_violation = dev;
            out.worst_lambda = l;
        }
    }
    out.ok = out.worst_violation <= tol;
    return out;
}

struct MarginalCheck {
    bool ok = false;
    double worst = 0.0;      // worst TV distance between marginals meant to agree
    std::string detail;
};

/// Ontic Parameter Independence: each side's marginal distribution depends
/// only on that side's own preparation choice.
inline MarginalCheck check_opi(const ProductJointScenario& s, double tol) {
    MarginalCheck out;
    auto compare = [&](const FiniteDistribution& p, const FiniteDistribution& q,
                       const std::string& what) {
        const double d = tv_distance(p, q);
        if (d > out.worst) {
            out.worst = d;
            out.detail = what;
        }
    };
    compare(marginal_a(s, "psi,psi"), marginal_a(s, "psi,phi"), "A marginal, a = psi");
    compare(marginal_a(s, "phi,psi"), marginal_a(s, "phi,phi"), "A marginal, a = phi");
    compare(marginal_b(s, "psi,psi"), marginal_b(s, "phi,psi"), "B marginal, b = psi");
    compare(marginal_b(s, "psi,phi"), marginal_b(s, "phi,phi"), "B marginal, b = phi");
    out.ok = out.worst <= tol;
    return out;
}

/// Independence Assumption: each joint distribution is the product of its
/// own marginals (no common-cause correlations).
inline MarginalCheck check_independence(const ProductJointScenario& s, double tol) {
    MarginalCheck out;
    for (const auto& name : pbr_pair_names()) {
        const auto& joint = s.model.preparation(name);
        const auto ma = marginal_a(s, name);
        const auto mb = marginal_b(s, name);
        for (std::size_t x = 0; x < s.lambda_a_size; ++x)
            for (std::size_t y = 0; y < s.lambda_b_size; ++y) {
                const double dev =
                    std::abs(joint[s.joint_index(x, y)] - ma[x] * mb[y]);
                if (dev > out.worst) {
                    out.worst = dev;
                    out.detail = "preparation '" + name + "'";
                }
            }
    }
    out.ok = out.worst <= tol;
    return out;
}

struct PipCheck {
    bool ok = false;
    MarginalCheck opi;
    MarginalCheck independence;
};

/// Preparation Independence Postulate: the Cartesian product structure is
/// carried by the type; what remains is OPI plus Independence.
inline PipCheck check_pip(const ProductJointScenario& s, double tol) {
    PipCheck out;
    out.opi = check_opi(s, tol);
    out.independence = check_independence(s, tol);
    out.ok = out.opi.ok && out.independence.ok;
    return out;
}

// ---------------------------------------------------------------------------
// The entangled-pair counterexample
// ---------------------------------------------------------------------------

struct PhiPlusExample {
    JointScenario scenario;
    std::string note;
};

/// Two parties share a maximally entangled pair and each chooses between
/// doing nothing and a bit flip.  Matched choices return the same state,
/// mismatched choices the other Bell state, so the ontic space has two
/// atoms and matched choices share one.  Learning one party's choice then
/// reveals the other's: the uninformativeness condition fails by 1/4.
inline PhiPlusExample phi_plus_example() {
    PhiPlusExample out;
    OntModel& m = out.scenario.model;
    m.lambda_size = 2;
    // psi = identity, phi = bit flip; atom 0 is the original entangled
    // state, atom 1 the flipped one
    m.preparations["psi,psi"] = FiniteDistribution::point_mass(2, 0);
    m.preparations["phi,phi"] = FiniteDistribution::point_mass(2, 0);
    m.preparations["psi,phi"] = FiniteDistribution::point_mass(2, 1);
    m.preparations["phi,psi"] = FiniteDistribution::point_mass(2, 1);
    ResponseFunction same, flipped;
    same.values = {1.0, 0.0};
    flipped.values = {0.0, 1.0};
    m.experiments["bell"] = {{"same", same}, {"flipped", flipped}};
    out.note = "not a local state-preparation: the systems start entangled and stay "
               "entangled, so the choices remain correlated through the shared state";
    return out;
}

// ---------------------------------------------------------------------------
// Theorem verifiers
// ---------------------------------------------------------------------------

namespace pdetail {

/// Locate the model experiment carrying exactly the certificate's labels.
inline std::string find_matching_experiment(const OntModel& m, const Experiment& e) {
    for (const auto& [name, resp] : m.experiments) {
        if (resp.size() != e.n_outcomes()) continue;
        bool all = true;
        for (const auto& o : e.outcomes()) {
            bool found = false;
            for (const auto& [label, f] : resp)
                if (label == o.label) { found = true; break; }
            if (!found) { all = false; break; }
        }
        if (all) return name;
    }
    throw std::invalid_argument("scenario does not declare the certificate's experiment");
}

inline double reproduction_deviation(const OntModel& m, const std::string& ename,
                                     const AntidistCertificate& cert) {
    double worst = 0.0;
    for (int p = 0; p < 4; ++p) {
        for (const auto& o : cert.experiment.outcomes()) {
            const double model_p = predicted_probability(
                m, pbr_pair_names()[static_cast<std::size_t>(p)], ename, o.label);
            const double born_p =
                born_probability(cert.states[static_cast<std::size_t>(p)], cert.experiment,
                                 o.label);
            worst = std::max(worst, std::abs(model_p - born_p));
        }
    }
    return worst;
}

} // namespace pdetail

struct PbrVerdict {
    bool distinct_a = false;
    bool distinct_b = false;
    bool symmetric = false;
    bool pass = false; // either side distinct; both when exchange-symmetric
    std::string detail;
};

/// The product-scenario conclusion: a PIP scenario reproducing an
/// antidistinguishing experiment must have ontologically distinct
/// subsystem distributions on at least one side, and on both sides when
/// the scenario is exchange symmetric.  A failure here is a
/// theorem-contradiction defect, reported in the verdict.
inline PbrVerdict verify_pbr_conclusion(const ProductJointScenario& s,
                                        const AntidistCertificate& cert, double tol,
                                        const Tolerances& tols = default_tolerances()) {
    const auto pip = check_pip(s, tols.reproduction);
    detail::require(pip.ok, "verify_pbr_conclusion: scenario does not satisfy the PIP");
    const auto ename = pdetail::find_matching_experiment(s.model, cert.experiment);
    const double dev = pdetail::reproduction_deviation(s.model, ename, cert);
    detail::require(dev <= tol, "verify_pbr_conclusion: scenario does not reproduce the "
                                "experiment (deviation " +
                                    std::to_string(dev) + ")");

    PbrVerdict out;
    out.distinct_a =
        ontologically_distinct(marginal_a(s, "psi,psi"), marginal_a(s, "phi,psi"), tols);
    out.distinct_b =
        ontologically_distinct(marginal_b(s, "psi,psi"), marginal_b(s, "psi,phi"), tols);

    out.symmetric = s.lambda_a_size == s.lambda_b_size;
    if (out.symmetric) {
        for (int p = 0; p < 4 && out.symmetric; ++p) {
            const auto& fwd = s.model.preparation(pbr_pair_names()[static_cast<std::size_t>(p)]);
            const auto& rev =
                s.model.preparation(pbr_pair_names()[static_cast<std::size_t>(2 * (p % 2) + p / 2)]);
            for (std::size_t x = 0; x < s.lambda_a_size && out.symmetric; ++x)
                for (std::size_t y = 0; y < s.lambda_b_size; ++y)
                    if (std::abs(fwd[s.joint_index(x, y)] - rev[s.joint_index(y, x)]) >
                        tols.reproduction) {
                        out.symmetric = false;
                        break;
                    }
        }
    }
    out.pass = out.symmetric ? (out.distinct_a && out.distinct_b)
                             : (out.distinct_a || out.distinct_b);
    if (!out.pass)
        out.detail = "theorem contradiction: subsystem distributions overlap under the PIP";
    return out;
}

/// In-model robustness parameter of a declared experiment: the largest,
/// over outcomes, of the smallest probability any of the four preparations
/// gives that outcome.  Zero exactly when the experiment antidistinguishes
/// the preparations in-model.
inline double epsilon_of_experiment(const JointScenario& s, const std::string& ename) {
    const auto& resp = s.model.experiment(ename);
    double eps = 0.0;
    for (const auto& [label, f] : resp) {
        double least = std::numeric_limits<double>::infinity();
        for (const auto& name : pbr_pair_names())
            least = std::min(least, predicted_probability(s.model, name, ename, label));
        eps = std::max(eps, least);
    }
    return eps;
}

struct RobustnessVerdict {
    double epsilon = 0.0;
    double bound = 0.0;
    double overlap_first = 0.0;   // omega(P_psi_psi, P_phi_phi) or A-side overlap
    double overlap_second = 0.0;  // omega(P_psi_phi, P_phi_psi) or B-side overlap
    bool pass = false;
};

/// Overlap bound under the uninformativeness condition: both the matched
/// pair and the crossed pair of joint distributions have overlap at most
/// 4 sqrt(epsilon).
inline RobustnessVerdict verify_robustness_puc(const JointScenario& s,
                                               const std::string& ename,
                                               const Tolerances& tols = default_tolerances()) {
    const auto puc = check_puc(s, 1e-9, tols);
    detail::require(puc.ok, "verify_robustness_puc: scenario fails the uninformativeness "
                            "condition (violation " +
                                std::to_string(puc.worst_violation) + ")");
    RobustnessVerdict out;
    out.epsilon = epsilon_of_experiment(s, ename);
    out.bound = 4.0 * std::sqrt(out.epsilon);
    out.overlap_first = min_overlap_mass(s.pair(0), s.pair(3));
    out.overlap_second = min_overlap_mass(s.pair(1), s.pair(2));
    out.pass = out.overlap_first <= out.bound + tols.bound_slack &&
               out.overlap_second <= out.bound + tols.bound_slack;
    return out;
}

/// Overlap bound under the full preparation-independence postulate: each
/// subsystem's psi/phi overlap is below 2 sqrt(epsilon).
inline RobustnessVerdict verify_robustness_pip(const ProductJointScenario& s,
                                               const std::string& ename,
                                               const Tolerances& tols = default_tolerances()) {
    const auto pip = check_pip(s, 1e-9);
    detail::require(pip.ok, "verify_robustness_pip: scenario fails the PIP");
    RobustnessVerdict out;
    out.epsilon = epsilon_of_experiment(flatten(s), ename);
    out.bound = 2.0 * std::sqrt(out.epsilon);
    out.overlap_first =
        min_overlap_mass(marginal_a(s, "psi,psi"), marginal_a(s, "phi,psi"));
    out.overlap_second =
        min_overlap_mass(marginal_b(s, "psi,psi"), marginal_b(s, "psi,phi"));
    out.pass = out.overlap_first <= out.bound + tols.bound_slack &&
               out.overlap_second <= out.bound + tols.bound_slack;
    return out;
}

struct PucTheoremVerdict {
    bool per_lambda_ok = false;   // each positive atom determines one side
    std::size_t worst_lambda = 0;
    double overlap_matched = 0.0; // omega(P_psi_psi, P_phi_phi)
    double overlap_crossed = 0.0; // omega(P_psi_phi, P_phi_psi)
    bool overlaps_ok = false;
    bool pass = false;
};

/// The exact-case theorem: uninformativeness plus exact reproduction of an
/// antidistinguishing experiment forces every ontic state to determine the
/// preparation of at least one side, and both the matched and crossed
/// joint distributions to have null overlap.
inline PucTheoremVerdict verify_puc_theorem(const JointScenario& s,
                                            const AntidistCertificate& cert, double tol,
                                            double reproduction_tol = 1e-10,
                                            const Tolerances& tols = default_tolerances()) {
    const auto puc = check_puc(s, tol, tols);
    detail::require(puc.ok, "verify_puc_theorem: scenario fails the uninformativeness "
                            "condition");
    const auto ename = pdetail::find_matching_experiment(s.model, cert.experiment);
    const double dev = pdetail::reproduction_deviation(s.model, ename, cert);
    detail::require(dev <= reproduction_tol,
                    "verify_puc_theorem: scenario does not reproduce the experiment "
                    "(deviation " + std::to_string(dev) + ")");

    PucTheoremVerdict out;
    out.per_lambda_ok = true;
    for (std::size_t l = 0; l < s.model.lambda_size; ++l) {
        double mass[4];
        double total = 0.0;
        for (int p = 0; p < 4; ++p) {
            mass[p] = s.pair(p)[l];
            total += mass[p];
        }
        if (total <= tols.support) continue;
        const double a_psi = (mass[0] + mass[1]) / total;
        const double b_psi = (mass[0] + mass[2]) / total;
        const bool a_determined = a_psi >= 1.0 - tols.unique_determination ||
                                  a_psi <= tols.unique_determination;
        const bool b_determined = b_psi >= 1.0 - tols.unique_determination ||
                                  b_psi <= tols.unique_determination;
        if (!a_determined && !b_determined) {
            out.per_lambda_ok = false;
            out.worst_lambda = l;
        }
    }
    out.overlap_matched = min_overlap_mass(s.pair(0), s.pair(3));
    out.overlap_crossed = min_overlap_mass(s.pair(1), s.pair(2));
    out.overlaps_ok = out.overlap_matched <= 1e-9 && out.overlap_crossed <= 1e-9;
    out.pass = out.per_lambda_ok && out.overlaps_ok;
    return out;
}

// ---------------------------------------------------------------------------
// N-subsystem arrays
// ---------------------------------------------------------------------------

/// Preparation name for a choice bitstring: bit i (subsystem i, counted
/// from the left of the name) set means phi.
inline std::string array_prep_name(unsigned bits, int n) {
    std::string out;
    for (int i = 0; i < n; ++i) {
        if (i) out += ',';
        out += ((bits >> i) & 1u) ? "phi" : "psi";
    }
    return out;
}

inline std::string pair_experiment_name(int i, int j) {
    return "pair_" + std::to_string(i) + "_" + std::to_string(j);
}

/// An N-subsystem scenario: one preparation per choice bitstring over a
/// shared ontic space, with one antidistinguishing experiment declared per
/// subsystem pair.
struct ArrayScenario {
    int n_subsystems = 0;
    OntModel model;
};

namespace pdetail {

/// Born matrix of the reference quadruple: born_matrix[2a+b][k] is the
/// probability of outcome k when the pair is prepared with choices (a, b).
inline const std::vector<std::vector<double>>& pbr_born_matrix() {
    static const std::vector<std::vector<double>> table = [] {
        const auto cert = pbr_measurement();
        std::vector<std::vector<double>> t(4, std::vector<double>(4, 0.0));
        for (int p = 0; p < 4; ++p) {
            int k = 0;
            for (const auto& o : cert.experiment.outcomes())
                t[static_cast<std::size_t>(p)][static_cast<std::size_t>(k++)] =
                    born_probability(cert.states[static_cast<std::size_t>(p)],
                                     cert.experiment, o.label);
        }
        return t;
    }();
    return table;
}

inline const std::vector<std::string>& pbr_outcome_labels() {
    static const std::vector<std::string> labels = [] {
        const auto cert = pbr_measurement();
        std::vector<std::string> out;
        for (const auto& o : cert.experiment.outcomes()) out.push_back(o.label);
        return out;
    }();
    return labels;
}

} // namespace pdetail

/// Reference array: one ontic atom per choice bitstring, point-mass
/// preparations, responses equal to the quadruple's Born values.
inline ArrayScenario canonical_array(int n) {
    detail::require(n >= 2 && n <= 6, "canonical_array: n outside [2, 6]");
    ArrayScenario s;
    s.n_subsystems = n;
    const unsigned count = 1u << n;
    s.model.lambda_size = count;
    for (unsigned bits = 0; bits < count; ++bits)
        s.model.preparations[array_prep_name(bits, n)] =
            FiniteDistribution::point_mass(count, bits);
    const auto& born = pdetail::pbr_born_matrix();
    const auto& labels = pdetail::pbr_outcome_labels();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            ExperimentResponses resp(4);
            for (int k = 0; k < 4; ++k) {
                resp[static_cast<std::size_t>(k)].label = labels[static_cast<std::size_t>(k)];
                resp[static_cast<std::size_t>(k)].response.values.assign(count, 0.0);
            }
            for (unsigned bits = 0; bits < count; ++bits) {
                const int a = (bits >> i) & 1, b = (bits >> j) & 1;
                for (int k = 0; k < 4; ++k)
                    resp[static_cast<std::size_t>(k)].response.values[bits] =
                        born[static_cast<std::size_t>(2 * a + b)][static_cast<std::size_t>(k)];
            }
            s.model.experiments[pair_experiment_name(i, j)] = std::move(resp);
        }
    return s;
}

/// The canonical array with one extra atom shared between the all-psi
/// preparation and the preparation flipping only the last subsystem.  At
/// that atom, every subsystem except the last is determined; responses are
/// adjusted in closed form so every pair experiment is still reproduced
/// exactly.  Valid for t <= 1/2.
inline ArrayScenario one_undetermined_array(int n, double t = 0.25, double g = 0.5) {
    detail::require(n >= 2 && n <= 6, "one_undetermined_array: n outside [2, 6]");
    detail::require(t > 0.0 && t <= 0.5, "one_undetermined_array: t outside (0, 1/2]");
    detail::require(g >= 0.0 && g <= 1.0, "one_undetermined_array: g outside [0, 1]");
    ArrayScenario s = canonical_array(n);
    const unsigned count = 1u << n;
    const unsigned s0 = 0u;                               // all psi
    const unsigned s1 = 1u << (n - 1);                    // phi on the last subsystem
    const std::size_t r = count;                          // the shared atom
    s.model.lambda_size = count + 1;
    for (auto& [name, d] : s.model.preparations) d.weights.resize(count + 1, 0.0);
    {
        auto& d0 = s.model.preparations[array_prep_name(s0, n)];
        d0.weights[s0] = 1.0 - t;
        d0.weights[r] = t;
        auto& d1 = s.model.preparations[array_prep_name(s1, n)];
        d1.weights[s1] = 1.0 - t;
        d1.weights[r] = t;
    }
    const auto& born = pdetail::pbr_born_matrix();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            auto& resp = s.model.experiments[pair_experiment_name(i, j)];
            for (auto& [label, f] : resp) f.values.resize(count + 1, 0.0);
            if (j != n - 1) {
                // both shared preparations present the pair choice (psi, psi)
                for (int k = 0; k < 4; ++k)
                    resp[static_cast<std::size_t>(k)].response.values[r] =
                        born[0][static_cast<std::size_t>(k)];
            } else {
                // the shared atom leaves subsystem n-1 open: outcomes that
                // exclude (psi,psi) and (psi,phi) must vanish there, and the
                // two point atoms compensate to keep the statistics exact
                auto& f = resp;
                f[0].response.values[r] = 0.0;
                f[1].response.values[r] = 0.0;
                f[2].response.values[r] = g;
                f[3].response.values[r] = 1.0 - g;
                f[0].response.values[s0] = 0.0;
                f[1].response.values[s0] = 0.25 / (1.0 - t);
                f[2].response.values[s0] = (0.25 - t * g) / (1.0 - t);
                f[3].response.values[s0] = (0.5 - t * (1.0 - g)) / (1.0 - t);
                f[0].response.values[s1] = 0.25 / (1.0 - t);
                f[1].response.values[s1] = 0.0;
                f[2].response.values[s1] = (0.5 - t * g) / (1.0 - t);
                f[3].response.values[s1] = (0.25 - t * (1.0 - g)) / (1.0 - t);
            }
        }
    return s;
}

/// Marginalizes an array scenario onto one subsystem pair: preparations
/// averaged over the other subsystems' choices (chosen uniformly), the
/// pair's own experiment carried along.
inline JointScenario marginalize_pair(const ArrayScenario& s, int i, int j) {
    detail::require(i >= 0 && j > i && j < s.n_subsystems, "marginalize_pair: bad pair");
    const int n = s.n_subsystems;
    const unsigned count = 1u << n;
    const double weight = 1.0 / static_cast<double>(1u << (n - 2));
    JointScenario out;
    out.model.lambda_size = s.model.lambda_size;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            FiniteDistribution d;
            d.weights.assign(s.model.lambda_size, 0.0);
            for (unsigned bits = 0; bits < count; ++bits) {
                if (((bits >> i) & 1) != static_cast<unsigned>(a) ||
                    ((bits >> j) & 1) != static_cast<unsigned>(b))
                    continue;
                const auto& src = s.model.preparation(array_prep_name(bits, n));
                for (std::size_t l = 0; l < d.weights.size(); ++l)
                    d.weights[l] += weight * src[l];
            }
            out.model.preparations[pbr_pair_names()[static_cast<std::size_t>(2 * a + b)]] =
                std::move(d);
        }
    out.model.experiments["pbr"] = s.model.experiment(pair_experiment_name(i, j));
    return out;
}

struct ArrayDetermination {
    bool pass = false;          // every positive-weight atom leaves <= 1 subsystem open
    double min_fraction = 1.0;  // min over atoms of determined / N
    std::size_t worst_lambda = 0;
    std::size_t max_undetermined = 0;
    std::string detail;
};

/// Checks the determination property of an array: given pairwise
/// uninformativeness and exactly reproduced pairwise antidistinguishing
/// experiments, every ontic state of positive weight determines the
/// preparation of all but at most one subsystem.
inline ArrayDetermination n_array_determination(const ArrayScenario& s,
                                                double reproduction_tol = 1e-9,
                                                const Tolerances& tols = default_tolerances()) {
    const int n = s.n_subsystems;
    const unsigned count = 1u << n;
    const auto& born = pdetail::pbr_born_matrix();
    const auto& labels = pdetail::pbr_outcome_labels();

    // premises: reproduction of every pair experiment, pairwise PUC
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const auto ename = pair_experiment_name(i, j);
            for (unsigned bits = 0; bits < count; ++bits) {
                const auto pname = array_prep_name(bits, n);
                const int a = (bits >> i) & 1, b = (bits >> j) & 1;
                for (int k = 0; k < 4; ++k) {
                    const double model_p = predicted_probability(
                        s.model, pname, ename, labels[static_cast<std::size_t>(k)]);
                    const double want =
                        born[static_cast<std::size_t>(2 * a + b)][static_cast<std::size_t>(k)];
                    detail::require(std::abs(model_p - want) <= reproduction_tol,
                                    "n_array_determination: pair experiment " + ename +
                                        " not reproduced under '" + pname + "'");
                }
            }
            const auto pairwise = check_puc(marginalize_pair(s, i, j), 1e-9, tols);
            detail::require(pairwise.ok, "n_array_determination: pairwise "
                                         "uninformativeness fails for " + ename);
        }

    ArrayDetermination out;
    out.pass = true;
    for (std::size_t l = 0; l < s.model.lambda_size; ++l) {
        double total = 0.0;
        std::vector<double> phi_mass(static_cast<std::size_t>(n), 0.0);
        for (unsigned bits = 0; bits < count; ++bits) {
            const double w = s.model.preparation(array_prep_name(bits, n))[l];
            total += w;
            for (int i = 0; i < n; ++i)
                if ((bits >> i) & 1) phi_mass[static_cast<std::size_t>(i)] += w;
        }
        if (total <= tols.support) continue;
        std::size_t undetermined = 0;
        for (int i = 0; i < n; ++i) {
            const double q = phi_mass[static_cast<std::size_t>(i)] / total;
            if (q > tols.unique_determination && q < 1.0 - tols.unique_determination)
                ++undetermined;
        }
        const double fraction = static_cast<double>(n - static_cast<int>(undetermined)) / n;
        if (undetermined > out.max_undetermined) {
            out.max_undetermined = undetermined;
            out.worst_lambda = l;
        }
        out.min_fraction = std::min(out.min_fraction, fraction);
        if (undetermined > 1) out.pass = false;
    }
    if (!out.pass)
        out.detail = "atom " + std::to_string(out.worst_lambda) + " leaves " +
                     std::to_string(out.max_undetermined) + " subsystems undetermined";
    return out;
}

struct ExtendibilityReport {
    bool consistent = true;
    bool premises_ok = true; // every member scenario passed its own premises
    double worst_marginal_deviation = 0.0;
    std::string worst_detail;
    std::string premise_detail;
    std::vector<double> fraction_lower_bounds; // (N-1)/N for N = 2..N_max
    std::vector<double> min_fractions;         // realized minima per N (NaN on failure)
};

/// Probes a family of array scenarios for mutual consistency: the
/// statistics of any N-subsystem face of the N'-scenario must match the
/// N-scenario, and the determination fractions are reported alongside
/// their (N-1)/N lower bounds.
inline ExtendibilityReport extendibility_probe(
    const std::function<ArrayScenario(int)>& generator, int n_max, double tol = 1e-9) {
    detail::require(n_max >= 2 && n_max <= 6, "extendibility_probe: n_max outside [2, 6]");
    ExtendibilityReport out;
    std::vector<ArrayScenario> scenarios;
    for (int n = 2; n <= n_max; ++n) scenarios.push_back(generator(n));

    for (int n = 2; n <= n_max; ++n) {
        out.fraction_lower_bounds.push_back(static_cast<double>(n - 1) / n);
        try {
            out.min_fractions.push_back(
                n_array_determination(scenarios[static_cast<std::size_t>(n - 2)])
                    .min_fraction);
        } catch (const std::invalid_argument& e) {
            out.premises_ok = false;
            out.premise_detail = "N=" + std::to_string(n) + ": " + e.what();
            out.min_fractions.push_back(std::numeric_limits<double>::quiet_NaN());
        }
    }

    const auto& labels = pdetail::pbr_outcome_labels();
    for (int n = 2; n <= n_max; ++n) {
        const auto& small = scenarios[static_cast<std::size_t>(n - 2)];
        for (int big_n = n + 1; big_n <= n_max; ++big_n) {
            const auto& big = scenarios[static_cast<std::size_t>(big_n - 2)];
            // iterate subsets of [big_n] of size n
            std::vector<int> subset(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) subset[static_cast<std::size_t>(i)] = i;
            while (true) {
                // compare the statistics of the face against the small scenario
                for (unsigned bits = 0; bits < (1u << n); ++bits) {
                    for (int u = 0; u < n; ++u)
                        for (int v = u + 1; v < n; ++v) {
                            const int i = subset[static_cast<std::size_t>(u)];
                            const int j = subset[static_cast<std::size_t>(v)];
                            for (int k = 0; k < 4; ++k) {
                                double marg = 0.0;
                                for (unsigned full = 0; full < (1u << big_n); ++full) {
                                    bool extends = true;
                                    for (int q = 0; q < n; ++q)
                                        if (((full >> subset[static_cast<std::size_t>(q)]) & 1u) !=
                                            ((bits >> q) & 1u)) {
                                            extends = false;
                                            break;
                                        }
                                    if (!extends) continue;
                                    marg += predicted_probability(
                                        big.model, array_prep_name(full, big_n),
                                        pair_experiment_name(i, j),
                                        labels[static_cast<std::size_t>(k)]);
                                }
                                marg /= static_cast<double>(1u << (big_n - n));
                                const double want = predicted_probability(
                                    small.model, array_prep_name(bits, n),
                                    pair_experiment_name(u, v),
                                    labels[static_cast<std::size_t>(k)]);
                                const double dev = std::abs(marg - want);
                                if (dev > out.worst_marginal_deviation) {
                                    out.worst_marginal_deviation = dev;
                                    out.worst_detail =
                                        "N=" + std::to_string(n) + " inside N'=" +
                                        std::to_string(big_n) + ", pair (" +
                                        std::to_string(i) + "," + std::to_string(j) + ")";
                                }
                            }
                        }
                }
                // next subset
                int pos = n - 1;
                while (pos >= 0 &&
                       subset[static_cast<std::size_t>(pos)] == big_n - n + pos)
                    --pos;
                if (pos < 0) break;
                ++subset[static_cast<std::size_t>(pos)];
                for (int q = pos + 1; q < n; ++q)
                    subset[static_cast<std::size_t>(q)] =
                        subset[static_cast<std::size_t>(q - 1)] + 1;
            }
        }
    }
    out.consistent = out.premises_ok && out.worst_marginal_deviation <= tol;
    return out;
}

} // namespace ontic
