/// Scenario generators for the theorem verifiers: the canonical product
/// scenario, randomized PIP / disjoint-support samples, LP-constructed
/// exactly-reproducing scenarios (uninformativeness-satisfying and
/// PIP-satisfying), epsilon-calibrated robustness scenarios, and the
/// randomized search for uninformative-but-correlated scenarios that
/// separate the uninformativeness condition from the no-correlations
/// assumption.

#pragma once

#include "ontic/pucthm.hpp"

namespace ontic {

/// Point-mass product scenario reproducing the quadruple exactly: two
/// ontic values per side (one per preparation choice).
inline ProductJointScenario canonical_pbr_product_scenario() {
    ProductJointScenario s;
    s.lambda_a_size = 2;
    s.lambda_b_size = 2;
    s.model.lambda_size = 4;
    const auto& born = pdetail::pbr_born_matrix();
    const auto& labels = pdetail::pbr_outcome_labels();
    for (int p = 0; p < 4; ++p)
        s.model.preparations[pbr_pair_names()[static_cast<std::size_t>(p)]] =
            FiniteDistribution::point_mass(4, static_cast<std::size_t>(p));
    ExperimentResponses resp(4);
    for (int k = 0; k < 4; ++k) {
        resp[static_cast<std::size_t>(k)].label = labels[static_cast<std::size_t>(k)];
        resp[static_cast<std::size_t>(k)].response.values.resize(4);
        for (int p = 0; p < 4; ++p)
            resp[static_cast<std::size_t>(k)].response.values[static_cast<std::size_t>(p)] =
                born[static_cast<std::size_t>(p)][static_cast<std::size_t>(k)];
    }
    s.model.experiments["pbr"] = std::move(resp);
    return s;
}

/// Random product scenario: independent Dirichlet locals per choice, joints
/// formed as products.  Satisfies the PIP by construction.
inline ProductJointScenario random_pip_scenario(std::uint64_t seed, std::size_t na,
                                                std::size_t nb) {
    std::mt19937_64 rng(seed);
    std::gamma_distribution<double> gamma(1.0, 1.0);
    auto simplex = [&](std::size_t n) {
        std::vector<double> w(n);
        double total = 0.0;
        for (auto& x : w) {
            x = gamma(rng);
            total += x;
        }
        for (auto& x : w) x /= total;
        return w;
    };
    const auto mu_psi = simplex(na), mu_phi = simplex(na);
    const auto nu_psi = simplex(nb), nu_phi = simplex(nb);
    ProductJointScenario s;
    s.lambda_a_size = na;
    s.lambda_b_size = nb;
    s.model.lambda_size = na * nb;
    auto product = [&](const std::vector<double>& a, const std::vector<double>& b) {
        FiniteDistribution d;
        d.weights.resize(na * nb);
        for (std::size_t x = 0; x < na; ++x)
            for (std::size_t y = 0; y < nb; ++y) d.weights[x * nb + y] = a[x] * b[y];
        return d;
    };
    s.model.preparations["psi,psi"] = product(mu_psi, nu_psi);
    s.model.preparations["psi,phi"] = product(mu_psi, nu_phi);
    s.model.preparations["phi,psi"] = product(mu_phi, nu_psi);
    s.model.preparations["phi,phi"] = product(mu_phi, nu_phi);
    return s;
}

/// Random scenario with pairwise disjoint supports: each preparation owns
/// its own block of the ontic space.
inline JointScenario random_disjoint_scenario(std::uint64_t seed, std::size_t block) {
    std::mt19937_64 rng(seed);
    std::gamma_distribution<double> gamma(1.0, 1.0);
    JointScenario s;
    s.model.lambda_size = 4 * block;
    for (int p = 0; p < 4; ++p) {
        FiniteDistribution d;
        d.weights.assign(4 * block, 0.0);
        double total = 0.0;
        for (std::size_t l = 0; l < block; ++l) {
            const double w = gamma(rng);
            d.weights[static_cast<std::size_t>(p) * block + l] = w;
            total += w;
        }
        for (auto& w : d.weights) w /= total;
        s.model.preparations[pbr_pair_names()[static_cast<std::size_t>(p)]] = std::move(d);
    }
    return s;
}

namespace sdetail {

/// Solves for response functions reproducing the quadruple's statistics
/// exactly over fixed scenario distributions: free variables are the
/// response values not pinned to zero by a preclusion (outcome k must
/// vanish wherever preparation k has weight), constraints are per-atom
/// normalization and the sixteen statistics, the objective is a seeded
/// random direction to vary the vertex.  Returns empty on infeasibility.
inline bool solve_responses(OntModel& model, std::uint64_t seed,
                            const Tolerances& tols = default_tolerances()) {
    const std::size_t lambda = model.lambda_size;
    const auto& born = pdetail::pbr_born_matrix();
    const auto& labels = pdetail::pbr_outcome_labels();

    std::vector<std::array<bool, 4>> forced_zero(lambda, {false, false, false, false});
    for (int p = 0; p < 4; ++p) {
        const auto& d = model.preparation(pbr_pair_names()[static_cast<std::size_t>(p)]);
        for (std::size_t l = 0; l < lambda; ++l)
            if (d[l] > tols.support) forced_zero[l][static_cast<std::size_t>(p)] = true;
    }
    std::vector<std::array<int, 4>> var_of(lambda, {-1, -1, -1, -1});
    std::size_t n_vars = 0;
    for (std::size_t l = 0; l < lambda; ++l)
        for (int k = 0; k < 4; ++k)
            if (!forced_zero[l][static_cast<std::size_t>(k)])
                var_of[l][static_cast<std::size_t>(k)] = static_cast<int>(n_vars++);

    LinearProgram lp;
    lp.sense = LpSense::Maximize;
    std::mt19937_64 rng(seed ^ 0xabcdef12345ull);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    lp.objective.resize(n_vars);
    for (auto& c : lp.objective) c = unif(rng);
    lp.lower.assign(n_vars, 0.0);
    lp.upper.assign(n_vars, 1.0);

    for (std::size_t l = 0; l < lambda; ++l) {
        std::vector<double> row(n_vars, 0.0);
        double rhs = 1.0;
        bool any = false;
        for (int k = 0; k < 4; ++k) {
            const int v = var_of[l][static_cast<std::size_t>(k)];
            if (v >= 0) {
                row[static_cast<std::size_t>(v)] = 1.0;
                any = true;
            }
        }
        if (!any) return false; // every outcome excluded at a populated atom
        lp.add_eq(std::move(row), rhs);
    }
    for (int p = 0; p < 4; ++p) {
        const auto& d = model.preparation(pbr_pair_names()[static_cast<std::size_t>(p)]);
        for (int k = 0; k < 4; ++k) {
            std::vector<double> row(n_vars, 0.0);
            for (std::size_t l = 0; l < lambda; ++l) {
                const int v = var_of[l][static_cast<std::size_t>(k)];
                if (v >= 0 && d[l] > 0.0) row[static_cast<std::size_t>(v)] = d[l];
            }
            lp.add_eq(std::move(row),
                      born[static_cast<std::size_t>(p)][static_cast<std::size_t>(k)]);
        }
    }

    const auto sol = solve_lp(lp, tols);
    if (sol.status != LpStatus::Optimal) return false;

    ExperimentResponses resp(4);
    for (int k = 0; k < 4; ++k) {
        resp[static_cast<std::size_t>(k)].label = labels[static_cast<std::size_t>(k)];
        auto& values = resp[static_cast<std::size_t>(k)].response.values;
        values.assign(lambda, 0.0);
        for (std::size_t l = 0; l < lambda; ++l) {
            const int v = var_of[l][static_cast<std::size_t>(k)];
            if (v >= 0) values[l] = std::clamp(sol.values[static_cast<std::size_t>(v)], 0.0, 1.0);
        }
    }
    model.experiments["pbr"] = std::move(resp);
    return true;
}

} // namespace sdetail

/// An exactly reproducing, uninformativeness-satisfying scenario over a
/// 3 x 3 product grid: each side has one ontic value per preparation
/// choice plus one "open" value shared between choices.  The four shared
/// atoms give the scenario genuine same-side overlaps (the quantity the
/// no-correlations assumption would forbid) while matched/crossed overlaps
/// stay null, exactly as the theorem demands.  Responses come from the
/// feasibility LP; a seed with an infeasible draw returns empty.
inline std::optional<ProductJointScenario> exact_puc_scenario_lp(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> t_draw(0.05, 0.5);
    const double t = t_draw(rng);

    ProductJointScenario s;
    s.lambda_a_size = 3;
    s.lambda_b_size = 3;
    s.model.lambda_size = 9;
    auto at = [&](std::size_t x, std::size_t y) { return 3 * x + y; };
    auto dist = [&](std::initializer_list<std::pair<std::size_t, double>> entries) {
        FiniteDistribution d;
        d.weights.assign(9, 0.0);
        for (const auto& [l, w] : entries) d.weights[l] = w;
        return d;
    };
    s.model.preparations["psi,psi"] =
        dist({{at(0, 0), 1.0 - t}, {at(0, 2), t / 2}, {at(2, 0), t / 2}});
    s.model.preparations["psi,phi"] =
        dist({{at(0, 1), 1.0 - t}, {at(0, 2), t / 2}, {at(2, 1), t / 2}});
    s.model.preparations["phi,psi"] =
        dist({{at(1, 0), 1.0 - t}, {at(1, 2), t / 2}, {at(2, 0), t / 2}});
    s.model.preparations["phi,phi"] =
        dist({{at(1, 1), 1.0 - t}, {at(1, 2), t / 2}, {at(2, 1), t / 2}});

    if (!sdetail::solve_responses(s.model, seed)) return std::nullopt;
    return s;
}

namespace sdetail {

/// Mixes every response toward the uniform outcome distribution until the
/// in-model robustness parameter hits the target exactly (the map from
/// mixing weight to epsilon is monotone).
inline void calibrate_epsilon(OntModel& model, const std::string& ename, double eps) {
    auto resp0 = model.experiment(ename);
    const double n_out = static_cast<double>(resp0.size());
    auto mixed = [&](double g) {
        ExperimentResponses out = resp0;
        for (auto& [label, f] : out)
            for (auto& v : f.values) v = (1.0 - g) * v + g / n_out;
        return out;
    };
    auto eps_at = [&](double g) {
        model.experiments[ename] = mixed(g);
        JointScenario probe{model};
        return epsilon_of_experiment(probe, ename);
    };
    double lo = 0.0, hi = 1.0;
    detail::require(eps_at(0.0) <= eps && eps <= eps_at(1.0),
                    "calibrate_epsilon: target outside reachable range");
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (eps_at(mid) <= eps)
            lo = mid;
        else
            hi = mid;
    }
    model.experiments[ename] = mixed(lo);
}

} // namespace sdetail

/// Uninformativeness-satisfying scenario with the experiment degraded to a
/// target epsilon.  A small fully-shared atom (factorized posterior) gives
/// the matched pair a genuinely nonzero overlap, which the 4 sqrt(eps)
/// bound must and does admit.
inline JointScenario puc_scenario_with_epsilon(std::uint64_t seed, double eps) {
    std::optional<ProductJointScenario> base;
    for (std::uint64_t offset = 0; offset < 16 && !base; ++offset)
        base = exact_puc_scenario_lp(seed + (offset << 32));
    detail::require(base.has_value(), "puc_scenario_with_epsilon: no feasible base draw");

    JointScenario s = flatten(*base);
    std::mt19937_64 rng(seed ^ 0x5e5e5e5eull);
    std::uniform_real_distribution<double> mix(0.3, 0.7), scale(0.1, 0.5);
    const double alpha = mix(rng), beta = mix(rng);
    const double w = scale(rng) * eps;
    const double c[4] = {alpha * beta, alpha * (1.0 - beta), (1.0 - alpha) * beta,
                         (1.0 - alpha) * (1.0 - beta)};

    const std::size_t full_atom = s.model.lambda_size;
    s.model.lambda_size += 1;
    for (int p = 0; p < 4; ++p) {
        auto& d = s.model.preparations[pbr_pair_names()[static_cast<std::size_t>(p)]];
        const double z = 4.0 * w * c[static_cast<std::size_t>(p)];
        for (auto& weight : d.weights) weight *= (1.0 - z);
        d.weights.push_back(z);
    }
    for (auto& [label, f] : s.model.experiments["pbr"]) f.values.push_back(0.25);
    (void)full_atom;

    sdetail::calibrate_epsilon(s.model, "pbr", eps);
    return s;
}

/// PIP-satisfying scenario with planted subsystem overlap omega and the
/// experiment calibrated to a target epsilon.  The construction needs
/// omega^2 / 4 <= eps, so omega is sampled strictly inside 2 sqrt(eps).
inline ProductJointScenario pip_scenario_with_epsilon(std::uint64_t seed, double eps) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> frac(0.3, 0.9);
    const double omega = frac(rng) * 2.0 * std::sqrt(eps);

    ProductJointScenario s;
    s.lambda_a_size = 3;
    s.lambda_b_size = 3;
    s.model.lambda_size = 9;
    const std::vector<double> mu_psi{1.0 - omega, 0.0, omega};
    const std::vector<double> mu_phi{0.0, 1.0 - omega, omega};
    auto product = [&](const std::vector<double>& a, const std::vector<double>& b) {
        FiniteDistribution d;
        d.weights.resize(9);
        for (std::size_t x = 0; x < 3; ++x)
            for (std::size_t y = 0; y < 3; ++y) d.weights[3 * x + y] = a[x] * b[y];
        return d;
    };
    s.model.preparations["psi,psi"] = product(mu_psi, mu_psi);
    s.model.preparations["psi,phi"] = product(mu_psi, mu_phi);
    s.model.preparations["phi,psi"] = product(mu_phi, mu_psi);
    s.model.preparations["phi,phi"] = product(mu_phi, mu_phi);

    // responses: outcomes excluded by any co-supported preparation vanish;
    // the remaining mass is spread by a seeded draw; the four-way atom has
    // no admissible zero and contributes the floor omega^2 / 4
    const auto& labels = pdetail::pbr_outcome_labels();
    std::gamma_distribution<double> gamma(1.0, 1.0);
    ExperimentResponses resp(4);
    for (int k = 0; k < 4; ++k) {
        resp[static_cast<std::size_t>(k)].label = labels[static_cast<std::size_t>(k)];
        resp[static_cast<std::size_t>(k)].response.values.assign(9, 0.0);
    }
    for (std::size_t l = 0; l < 9; ++l) {
        std::array<bool, 4> present{};
        for (int p = 0; p < 4; ++p)
            present[static_cast<std::size_t>(p)] =
                s.model.preparation(pbr_pair_names()[static_cast<std::size_t>(p)])[l] > 0.0;
        std::vector<int> free;
        for (int k = 0; k < 4; ++k)
            if (!present[static_cast<std::size_t>(k)]) free.push_back(k);
        if (free.empty()) {
            for (int k = 0; k < 4; ++k)
                resp[static_cast<std::size_t>(k)].response.values[l] = 0.25;
        } else {
            double total = 0.0;
            std::vector<double> draw(free.size());
            for (auto& x : draw) {
                x = gamma(rng);
                total += x;
            }
            for (std::size_t q = 0; q < free.size(); ++q)
                resp[static_cast<std::size_t>(free[q])].response.values[l] = draw[q] / total;
        }
    }
    s.model.experiments["pbr"] = std::move(resp);

    sdetail::calibrate_epsilon(s.model, "pbr", eps);
    return s;
}

/// Exchange-symmetric product scenario with disjoint local supports and
/// LP-solved responses reproducing the quadruple exactly.  The PIP holds
/// by construction; the conclusion verifier should find both subsystem
/// pairs ontologically distinct.
inline std::optional<ProductJointScenario> exact_pip_scenario_lp(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::gamma_distribution<double> gamma(1.0, 1.0);
    auto half_simplex = [&]() {
        const double a = gamma(rng), b = gamma(rng);
        return std::pair<double, double>{a / (a + b), b / (a + b)};
    };
    const auto [p0, p1] = half_simplex();
    const auto [q0, q1] = half_simplex();
    const std::vector<double> mu_psi{p0, p1, 0.0, 0.0};
    const std::vector<double> mu_phi{0.0, 0.0, q0, q1};

    ProductJointScenario s;
    s.lambda_a_size = 4;
    s.lambda_b_size = 4;
    s.model.lambda_size = 16;
    auto product = [&](const std::vector<double>& a, const std::vector<double>& b) {
        FiniteDistribution d;
        d.weights.resize(16);
        for (std::size_t x = 0; x < 4; ++x)
            for (std::size_t y = 0; y < 4; ++y) d.weights[4 * x + y] = a[x] * b[y];
        return d;
    };
    s.model.preparations["psi,psi"] = product(mu_psi, mu_psi);
    s.model.preparations["psi,phi"] = product(mu_psi, mu_phi);
    s.model.preparations["phi,psi"] = product(mu_phi, mu_psi);
    s.model.preparations["phi,phi"] = product(mu_phi, mu_phi);

    if (!sdetail::solve_responses(s.model, seed)) return std::nullopt;
    return s;
}

struct GapSearchResult {
    bool found = false;
    ProductJointScenario scenario;
    double gap = 0.0;         // omega(P_psi_psi, P_psi_phi) of the best find
    std::uint64_t best_seed = 0;
    int attempts = 0;
};

/// Randomized search for a scenario that separates uninformativeness from
/// the no-correlations assumption: exactly reproduces the quadruple's
/// experiment, passes the uninformativeness check, yet has nonzero overlap
/// between same-A-choice joints (so independence must fail).  Maximizes
/// the overlap over the sampled draws; no optimality claim.
inline GapSearchResult search_puc_nca_gap(const Fragment& fragment, std::size_t lambda_cap,
                                          int seeds) {
    for (const auto& name : pbr_pair_names())
        fragment.preparation(name); // throws on a non-quadruple fragment
    detail::require(lambda_cap >= 9 && lambda_cap <= 32,
                    "search_puc_nca_gap: lambda cap outside [9, 32]");
    GapSearchResult out;
    for (int i = 0; i < seeds; ++i) {
        ++out.attempts;
        const auto draw = exact_puc_scenario_lp(static_cast<std::uint64_t>(i));
        if (!draw) continue;
        const auto flat = flatten(*draw);
        if (!check_puc(flat, 1e-9).ok) continue;
        if (pdetail::reproduction_deviation(draw->model, "pbr", pbr_measurement()) > 1e-9)
            continue;
        const double gap = min_overlap_mass(flat.pair(0), flat.pair(1));
        if (!out.found || gap > out.gap) {
            out.found = true;
            out.scenario = *draw;
            out.gap = gap;
            out.best_seed = static_cast<std::uint64_t>(i);
        }
    }
    return out;
}

} // namespace ontic
