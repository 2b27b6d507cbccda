/// The dimension-4 overlap-bound apparatus: mutually unbiased bases, the
/// 16-state family around a reference state, certification of the family's
/// pair properties, the bound arithmetic, and the model audit.
///
/// The payoff inequality: for any model reproducing the family's
/// statistics, the average classical overlap of the reference preparation
/// with the sixteen family preparations is at most 1/d^2, which is below
/// half of the quantum overlap they all share.  A reproducing model that
/// failed the audit would be a defect finding, not a tolerance issue.

#pragma once

#include "ontic/antidist.hpp"
#include "ontic/lp.hpp"

namespace ontic {

/// Five orthonormal bases of C^4 with all cross-basis inner products of
/// modulus 1/2.  Validated at construction.
struct MubSet {
    int dim = 4;
    std::vector<std::vector<PureState>> bases; // 5 bases x 4 states

    MubSet(std::vector<std::vector<PureState>> b, const Tolerances& tol = default_tolerances())
        : bases(std::move(b)) {
        detail::require(bases.size() == 5, "MubSet: expected 5 bases");
        for (const auto& basis : bases) {
            detail::require(basis.size() == 4, "MubSet: expected 4 states per basis");
            for (std::size_t i = 0; i < 4; ++i)
                for (std::size_t j = 0; j < 4; ++j) {
                    const double m = std::abs(inner_product(basis[i], basis[j]));
                    const double want = (i == j) ? 1.0 : 0.0;
                    detail::require(std::abs(m - want) <= tol.phase_equal,
                                    "MubSet: basis not orthonormal");
                }
        }
        for (std::size_t a = 0; a < 5; ++a)
            for (std::size_t b2 = a + 1; b2 < 5; ++b2)
                for (const auto& e : bases[a])
                    for (const auto& f : bases[b2]) {
                        const double m = std::abs(inner_product(e, f));
                        detail::require(std::abs(m - 0.5) <= tol.phase_equal,
                                        "MubSet: cross-basis inner product is not 1/2");
                    }
    }
};

namespace bdetail {

inline CMatrix pauli(char p) {
    CMatrix m = CMatrix::Zero(2, 2);
    switch (p) {
        case 'I': m(0, 0) = 1.0; m(1, 1) = 1.0; break;
        case 'X': m(0, 1) = 1.0; m(1, 0) = 1.0; break;
        case 'Y': m(0, 1) = Complex(0.0, -1.0); m(1, 0) = Complex(0.0, 1.0); break;
        case 'Z': m(0, 0) = 1.0; m(1, 1) = -1.0; break;
        default: throw std::logic_error("pauli: bad label");
    }
    return m;
}

inline CMatrix kron2(const CMatrix& a, const CMatrix& b) {
    CMatrix out(4, 4);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) out.block(2 * i, 2 * j, 2, 2) = a(i, j) * b;
    return out;
}

/// Joint eigenvector of two commuting two-qubit Pauli operators for signs
/// (s, t), extracted from the rank-1 projector (I+sA)(I+tB)/4 with a fixed
/// phase convention (first significant amplitude real positive).
inline PureState joint_eigenvector(const CMatrix& a, const CMatrix& b, double s, double t) {
    const CMatrix id = CMatrix::Identity(4, 4);
    const CMatrix proj = 0.25 * (id + s * a) * (id + t * b);
    int best_col = 0;
    double best_norm = -1.0;
    for (int c = 0; c < 4; ++c) {
        const double n = proj.col(c).norm();
        if (n > best_norm + 1e-12) {
            best_norm = n;
            best_col = c;
        }
    }
    CVector v = proj.col(best_col);
    v.normalize();
    for (int i = 0; i < 4; ++i) {
        if (std::abs(v(i)) > 1e-8) {
            v *= std::conj(v(i)) / std::abs(v(i));
            break;
        }
    }
    return PureState(std::move(v));
}

} // namespace bdetail

/// Standard two-qubit construction: the computational basis plus the four
/// joint eigenbases of the commuting triples that partition the fifteen
/// two-qubit Pauli operators.  The MubSet invariants do the trusting.
inline MubSet mubs_d4() {
    using bdetail::kron2;
    using bdetail::pauli;
    const std::vector<std::pair<CMatrix, CMatrix>> generators = {
        {kron2(pauli('Z'), pauli('I')), kron2(pauli('I'), pauli('Z'))},
        {kron2(pauli('X'), pauli('I')), kron2(pauli('I'), pauli('X'))},
        {kron2(pauli('Y'), pauli('I')), kron2(pauli('I'), pauli('Y'))},
        {kron2(pauli('X'), pauli('Y')), kron2(pauli('Y'), pauli('Z'))},
        {kron2(pauli('Y'), pauli('X')), kron2(pauli('Z'), pauli('Y'))}};
    std::vector<std::vector<PureState>> bases;
    for (const auto& [a, b] : generators) {
        std::vector<PureState> basis;
        for (const double s : {1.0, -1.0})
            for (const double t : {1.0, -1.0})
                basis.push_back(bdetail::joint_eigenvector(a, b, s, t));
        bases.push_back(std::move(basis));
    }
    return MubSet(std::move(bases));
}

struct PairEvidence {
    enum class Kind { Orthogonal, Triple } kind = Kind::Orthogonal;
    bool criterion_ok = false;                      // Triple only
    std::optional<AntidistCertificate> certificate; // explicit POVM when found
    bool warning = false;                           // Triple certified by criterion alone
};

/// The reference state and its sixteen companions: every companion has
/// |<phi|psi_i>| = 1/2, and every companion pair is either orthogonal or
/// forms an antidistinguishable triple with phi.
struct BclmFamily {
    PureState phi;
    std::vector<PureState> psis;  // 16
    std::vector<int> basis_of;    // family-basis index (0..3) per psi
    std::map<std::pair<int, int>, PairEvidence> pair_evidence; // i < j
};

/// Builds the family from the d = 4 MUBs: phi is one basis vector, the
/// family is the sixteen vectors of the remaining four bases.  Cross-basis
/// pairs are certified by the boundary triple criterion and, where the
/// search succeeds, an explicit measurement; a certification failure
/// aborts naming the offending pair.
inline BclmFamily construct_family(int phi_basis_index, int phi_vector_index,
                                   int search_iters = 3000, double cert_tol = 1e-9) {
    const MubSet mubs = mubs_d4();
    detail::require(phi_basis_index >= 0 && phi_basis_index < 5 && phi_vector_index >= 0 &&
                        phi_vector_index < 4,
                    "construct_family: index out of range");
    BclmFamily fam{mubs.bases[static_cast<std::size_t>(phi_basis_index)]
                            [static_cast<std::size_t>(phi_vector_index)],
                   {}, {}, {}};
    for (int b = 0; b < 5; ++b) {
        if (b == phi_basis_index) continue;
        for (const auto& s : mubs.bases[static_cast<std::size_t>(b)]) {
            fam.psis.push_back(s);
            fam.basis_of.push_back(static_cast<int>(fam.basis_of.size()) / 4);
        }
    }

    for (int i = 0; i < 16; ++i) {
        const double m = std::abs(inner_product(fam.phi, fam.psis[static_cast<std::size_t>(i)]));
        detail::require(std::abs(m - 0.5) <= 1e-10,
                        "construct_family: |<phi|psi_" + std::to_string(i) + ">| != 1/2");
    }

    for (int i = 0; i < 16; ++i) {
        for (int j = i + 1; j < 16; ++j) {
            PairEvidence ev;
            const auto& si = fam.psis[static_cast<std::size_t>(i)];
            const auto& sj = fam.psis[static_cast<std::size_t>(j)];
            if (fam.basis_of[static_cast<std::size_t>(i)] ==
                fam.basis_of[static_cast<std::size_t>(j)]) {
                ev.kind = PairEvidence::Kind::Orthogonal;
                detail::require(std::abs(inner_product(si, sj)) <= 1e-10,
                                "construct_family: same-basis pair (" + std::to_string(i) +
                                    "," + std::to_string(j) + ") is not orthogonal");
            } else {
                ev.kind = PairEvidence::Kind::Triple;
                const double a = std::norm(inner_product(fam.phi, si));
                const double b = std::norm(inner_product(fam.phi, sj));
                const double c = std::norm(inner_product(si, sj));
                ev.criterion_ok = triple_criterion(a, b, c);
                detail::require(ev.criterion_ok, "construct_family: triple criterion failed "
                                                 "for pair (" +
                                                     std::to_string(i) + "," +
                                                     std::to_string(j) + ")");
                const std::uint64_t seed =
                    0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(16 * i + j + 1);
                ev.certificate =
                    search_antidist({fam.phi, si, sj}, search_iters, cert_tol, seed, 6);
                ev.warning = !ev.certificate.has_value();
            }
            fam.pair_evidence[{i, j}] = std::move(ev);
        }
    }
    return fam;
}

struct BoundArithmetic {
    double omega_q = 0.0;           // 1 - sqrt(1 - 1/d)
    double mean_bound = 0.0;        // 1/d^2
    double ratio_coefficient = 0.0; // (1/d)(1 + sqrt(1 - 1/d)), < 2/d
};

/// The closed-form pieces of the overlap bound; the algebraic identity
/// mean_bound = ratio_coefficient * omega_q holds exactly.
inline BoundArithmetic bound_arithmetic(int d) {
    detail::require(d >= 4, "bound_arithmetic: requires dimension at least 4");
    const double root = std::sqrt(1.0 - 1.0 / d);
    return {1.0 - root, 1.0 / (static_cast<double>(d) * d), (1.0 + root) / d};
}

/// Preparation names for the family fragment: "phi", "psi_0".."psi_15".
inline std::string family_prep_name(int i) {
    return i < 0 ? std::string("phi") : "psi_" + std::to_string(i);
}

/// The statistics the overlap argument needs: one antidistinguishing
/// experiment per cross-basis pair (from the pair's certificate) and each
/// family basis's own measurement for the orthogonal pairs.  Pairs whose
/// search produced no certificate contribute no experiment (tracked by the
/// warning flag on their evidence).
inline Fragment bclm_fragment(const BclmFamily& fam) {
    std::map<std::string, PureState> preps;
    preps.emplace("phi", fam.phi);
    for (int i = 0; i < 16; ++i)
        preps.emplace(family_prep_name(i), fam.psis[static_cast<std::size_t>(i)]);

    std::map<std::string, Experiment> exps;
    for (int b = 0; b < 4; ++b) {
        std::vector<std::pair<std::string, PureState>> kets;
        for (int v = 0; v < 4; ++v)
            kets.emplace_back("v" + std::to_string(v),
                              fam.psis[static_cast<std::size_t>(4 * b + v)]);
        exps.emplace("basis_" + std::to_string(b), projective_experiment(kets));
    }
    for (const auto& [pair, ev] : fam.pair_evidence) {
        if (ev.kind != PairEvidence::Kind::Triple || !ev.certificate) continue;
        exps.emplace("triple_" + std::to_string(pair.first) + "_" +
                         std::to_string(pair.second),
                     ev.certificate->experiment);
    }
    return Fragment(4, std::move(preps), std::move(exps));
}

struct BclmAudit {
    double omega_bar = 0.0;
    double omega_q = 0.0;
    std::vector<double> pair_overlaps;  // 16, indexed like psis
    int min_pair = -1;
    double min_overlap = 0.0;
    double min_ratio = 0.0;             // min_overlap / omega_q
    double mean_bound = 0.0;            // 1/16
    double ratio_coefficient = 0.0;     // 0.4665...
    bool mean_bound_pass = false;       // omega_bar <= 1/16 + 1e-8
    bool strict_pair_pass = false;      // some pair below coefficient * omega_q
    bool pass = false;
};

/// Audits a model of the family fragment against both bound clauses.
/// Precondition: the model reproduces the fragment within 1e-8; a model
/// that reproduces and still fails is a defect finding.
inline BclmAudit audit_model(const OntModel& m, const BclmFamily& fam, const Fragment& frag,
                             double reproduction_tol = 1e-8) {
    const auto rep = reproduces_fragment(m, frag, reproduction_tol);
    detail::require(rep.ok, "audit_model: model does not reproduce the family fragment "
                            "(max deviation " +
                                std::to_string(rep.max_deviation) + ")");
    const auto arithmetic = bound_arithmetic(4);
    BclmAudit out;
    out.omega_q = arithmetic.omega_q;
    out.mean_bound = arithmetic.mean_bound;
    out.ratio_coefficient = arithmetic.ratio_coefficient;

    const auto& p_phi = m.preparation("phi");
    double sum = 0.0;
    for (int i = 0; i < 16; ++i) {
        const double w = min_overlap_mass(p_phi, m.preparation(family_prep_name(i)));
        out.pair_overlaps.push_back(w);
        sum += w;
        if (out.min_pair < 0 || w < out.min_overlap) {
            out.min_pair = i;
            out.min_overlap = w;
        }
    }
    out.omega_bar = sum / 16.0;
    out.min_ratio = out.min_overlap / out.omega_q;
    out.mean_bound_pass = out.omega_bar <= out.mean_bound + 1e-8;
    out.strict_pair_pass = out.min_overlap < out.ratio_coefficient * out.omega_q;
    out.pass = out.mean_bound_pass && out.strict_pair_pass;
    return out;
}

/// A seeded response family over which the LP adversary runs: canonical
/// atoms for every preparation, plus "shared" atoms wearing the preclusion
/// zeros of phi and one target psi, plus companion atoms built so that
/// putting weight on a shared atom stays statistically consistent.  The
/// construction guarantees the LP can realize nonzero overlap, which keeps
/// the audit adversarial rather than vacuous.
inline std::map<std::string, ExperimentResponses> randomized_response_family(
    const BclmFamily& fam, const Fragment& frag, std::uint64_t seed, int n_shared,
    std::size_t& lambda_size_out) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.15, 0.85);
    std::uniform_int_distribution<int> pick(0, 15);

    // per-atom response tables: atom -> experiment -> outcome values
    struct Atom {
        std::map<std::string, std::vector<double>> table;
    };
    std::vector<Atom> atoms;

    const auto& exps = frag.experiments();
    auto born_table = [&](const PureState& s) {
        Atom a;
        for (const auto& [ename, e] : exps) {
            std::vector<double> row;
            for (const auto& o : e.outcomes()) row.push_back(born_probability(s, e, o.label));
            a.table[ename] = std::move(row);
        }
        return a;
    };

    // canonical atoms, one per preparation (order: phi, psi_0..psi_15)
    atoms.push_back(born_table(fam.phi));
    for (int i = 0; i < 16; ++i)
        atoms.push_back(born_table(fam.psis[static_cast<std::size_t>(i)]));

    auto parse_triple = [](const std::string& name, int& i, int& j) {
        if (name.rfind("triple_", 0) != 0) return false;
        const auto rest = name.substr(7);
        const auto us = rest.find('_');
        i = std::stoi(rest.substr(0, us));
        j = std::stoi(rest.substr(us + 1));
        return true;
    };

    for (int sidx = 0; sidx < n_shared; ++sidx) {
        const int target = pick(rng);
        // shared atom: preclusion zeros for phi and psi_target everywhere
        Atom shared;
        for (const auto& [ename, e] : exps) {
            const std::size_t n_out = e.n_outcomes();
            std::vector<double> row(n_out, 0.0);
            int i = -1, j = -1;
            if (parse_triple(ename, i, j)) {
                // outcome order in triple certificates: o0 excludes phi,
                // o1 excludes psi_i, o2 excludes psi_j
                if (i == target)
                    row[2] = 1.0;
                else if (j == target)
                    row[1] = 1.0;
                else {
                    const double r = unif(rng);
                    row[1] = r;
                    row[2] = 1.0 - r;
                }
            } else { // basis measurement
                const int b = std::stoi(ename.substr(6));
                if (fam.basis_of[static_cast<std::size_t>(target)] == b) {
                    row[static_cast<std::size_t>(target % 4)] = 1.0;
                } else {
                    double total = 0.0;
                    for (auto& x : row) {
                        x = unif(rng);
                        total += x;
                    }
                    for (auto& x : row) x /= total;
                }
            }
            shared.table[ename] = std::move(row);
        }

        // companion atoms: f_comp = (Born - mu * f_shared) / (1 - mu) with the
        // largest feasible mu, one for the target and one for phi
        auto companion = [&](const PureState& s) -> std::optional<std::pair<Atom, double>> {
            double mu = 0.9;
            for (const auto& [ename, e] : exps) {
                const auto& fs = shared.table[ename];
                std::size_t k = 0;
                for (const auto& o : e.outcomes()) {
                    const double b = born_probability(s, e, o.label);
                    if (fs[k] > 1e-12) mu = std::min(mu, b / fs[k]);
                    if (fs[k] < 1.0 - 1e-12) mu = std::min(mu, (1.0 - b) / (1.0 - fs[k]));
                    ++k;
                }
            }
            mu *= 0.9;
            if (mu < 1e-3) return std::nullopt;
            Atom comp;
            for (const auto& [ename, e] : exps) {
                const auto& fs = shared.table[ename];
                std::vector<double> row(e.n_outcomes());
                std::size_t k = 0;
                for (const auto& o : e.outcomes()) {
                    const double b = born_probability(s, e, o.label);
                    row[k] = (b - mu * fs[k]) / (1.0 - mu);
                    ++k;
                }
                comp.table[ename] = std::move(row);
            }
            return std::make_pair(std::move(comp), mu);
        };

        atoms.push_back(shared);
        if (auto c = companion(fam.psis[static_cast<std::size_t>(target)])) {
            atoms.push_back(std::move(c->first));
        }
        if (auto c = companion(fam.phi)) {
            atoms.push_back(std::move(c->first));
        }
    }

    lambda_size_out = atoms.size();
    std::map<std::string, ExperimentResponses> responses;
    for (const auto& [ename, e] : exps) {
        ExperimentResponses resp;
        std::size_t k = 0;
        for (const auto& o : e.outcomes()) {
            ResponseFunction rf;
            rf.values.resize(atoms.size());
            for (std::size_t l = 0; l < atoms.size(); ++l)
                rf.values[l] = atoms[l].table.at(ename)[k];
            resp.push_back({o.label, std::move(rf)});
            ++k;
        }
        responses[ename] = std::move(resp);
    }
    return responses;
}

struct SeededAuditRun {
    std::uint64_t seed = 0;
    int target_pair = -1;
    double omega_star = 0.0;
    BclmAudit audit;
};

/// One adversarial audit round: build the seeded response family, let the
/// LP maximize the overlap of (phi, psi_target), audit the fitted model.
inline SeededAuditRun run_seeded_audit(const BclmFamily& fam, const Fragment& frag,
                                       std::uint64_t seed) {
    SeededAuditRun run;
    run.seed = seed;
    run.target_pair = static_cast<int>(seed % 16);
    std::size_t lambda = 0;
    const auto responses = randomized_response_family(fam, frag, seed, 4, lambda);
    const auto fit = max_overlap_fit(frag, responses, lambda, "phi",
                                     family_prep_name(run.target_pair));
    detail::require(fit.feasible, "run_seeded_audit: response family infeasible");
    run.omega_star = fit.omega_star;
    run.audit = audit_model(fit.model, fam, frag);
    return run;
}

} // namespace ontic
