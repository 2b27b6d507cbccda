#include <catch2/catch_amalgamated.hpp>

#include "ontic/bclm.hpp"
#include "test_helpers.hpp"

using namespace ontic;
using Catch::Approx;

TEST_CASE("the d = 4 construction yields five mutually unbiased bases") {
    const auto mubs = mubs_d4(); // constructor enforces the invariants

    std::size_t count = 0;
    for (const auto& basis : mubs.bases) count += basis.size();
    REQUIRE(count == 20);

    // exhaustive cross-check, independent of the MubSet constructor
    for (std::size_t a = 0; a < 5; ++a)
        for (std::size_t b = a + 1; b < 5; ++b)
            for (const auto& e : mubs.bases[a])
                for (const auto& f : mubs.bases[b])
                    REQUIRE(std::abs(inner_product(e, f)) == Approx(0.5).margin(1e-10));

    for (const auto& basis : mubs.bases)
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j) {
                const double m = std::abs(inner_product(basis[i], basis[j]));
                REQUIRE(m == Approx(i == j ? 1.0 : 0.0).margin(1e-10));
            }
}

TEST_CASE("family construction certifies every pair") {
    const auto fam = construct_family(0, 0);
    REQUIRE(fam.psis.size() == 16);
    for (const auto& psi : fam.psis)
        REQUIRE(std::abs(inner_product(fam.phi, psi)) == Approx(0.5).margin(1e-10));

    std::size_t orthogonal = 0, triples = 0, with_certificate = 0;
    for (const auto& [pair, ev] : fam.pair_evidence) {
        const bool same_basis = fam.basis_of[static_cast<std::size_t>(pair.first)] ==
                                fam.basis_of[static_cast<std::size_t>(pair.second)];
        if (same_basis) {
            REQUIRE(ev.kind == PairEvidence::Kind::Orthogonal);
            ++orthogonal;
        } else {
            REQUIRE(ev.kind == PairEvidence::Kind::Triple);
            REQUIRE(ev.criterion_ok);
            ++triples;
            if (ev.certificate) {
                ++with_certificate;
                REQUIRE(verify_certificate(*ev.certificate, 1e-9).ok);
                REQUIRE(ev.certificate->experiment.n_outcomes() == 3);
            }
        }
    }
    REQUIRE(orthogonal == 24);
    REQUIRE(triples == 96);
    // at least 90% of the cross-basis pairs carry an explicit measurement
    REQUIRE(with_certificate * 10 >= triples * 9);
}

TEST_CASE("bound arithmetic") {
    const auto b4 = bound_arithmetic(4);
    REQUIRE(b4.omega_q == Approx(1.0 - std::sqrt(3.0) / 2.0).margin(1e-15));
    REQUIRE(b4.omega_q == Approx(0.13397459621556135).margin(1e-12));
    REQUIRE(b4.mean_bound == Approx(0.0625).margin(1e-15));
    REQUIRE(b4.ratio_coefficient == Approx(0.46650635094610965).margin(1e-12));
    REQUIRE(b4.ratio_coefficient == Approx(0.47).margin(5e-3));

    // the algebraic identity behind the bound chain
    for (int d = 4; d <= 1024; d *= 2) {
        const auto b = bound_arithmetic(d);
        REQUIRE(b.ratio_coefficient * b.omega_q == Approx(b.mean_bound).margin(1e-12));
        REQUIRE(b.ratio_coefficient < 2.0 / d);
    }
    REQUIRE_THROWS_AS(bound_arithmetic(3), std::invalid_argument);
}

TEST_CASE("canonical model of the family fragment passes the audit") {
    const auto fam = construct_family(0, 0);
    const auto frag = bclm_fragment(fam);
    const auto m = canonical_psi_ontic(frag);
    const auto audit = audit_model(m, fam, frag);
    REQUIRE(audit.omega_bar == Approx(0.0).margin(1e-12));
    REQUIRE(audit.mean_bound_pass);
    REQUIRE(audit.strict_pair_pass);
    REQUIRE(audit.pass);
}

TEST_CASE("a planted three-way atom cannot sneak past the audit") {
    const auto fam = construct_family(0, 0);
    const auto frag = bclm_fragment(fam);
    auto m = canonical_psi_ontic(frag);
    // share mass between phi and two cross-basis companions
    for (const auto& name : {"phi", "psi_0", "psi_4"}) {
        auto& d = m.preparations[name];
        for (auto& w : d.weights) w *= 0.9;
        d.weights[0] += 0.1;
    }
    REQUIRE_THROWS_AS(audit_model(m, fam, frag), std::invalid_argument);
}

TEST_CASE("the LP adversary stays under the mean bound") {
    const auto fam = construct_family(0, 0);
    const auto frag = bclm_fragment(fam);
    for (const std::uint64_t seed : {3ull, 8ull}) {
        const auto run = run_seeded_audit(fam, frag, seed);
        REQUIRE(run.audit.omega_bar <= 0.0625 + 1e-8);
        REQUIRE(run.audit.strict_pair_pass);
        REQUIRE(run.audit.pass);
        // the adversary construction guarantees a nonvacuous maximization
        REQUIRE(run.omega_star > 1e-4);
        // mean dominates min, sum stays under one
        double total = 0.0;
        for (double w : run.audit.pair_overlaps) total += w;
        REQUIRE(total <= 1.0 + 1e-7);
        REQUIRE(run.audit.min_overlap <= run.audit.omega_bar + 1e-12);
        REQUIRE(run.audit.omega_bar == Approx(total / 16.0).margin(1e-12));
    }
}
