#include <catch2/catch_amalgamated.hpp>

#include "ontic/antidist.hpp"
#include "ontic/omodel.hpp"
#include "test_helpers.hpp"

using namespace ontic;
using Catch::Approx;

namespace {

Fragment two_state_fragment() {
    const Experiment z = projective_experiment({{"0", ket0()}, {"1", ket1()}});
    return Fragment(2, {{"zero", ket0()}, {"plus", ket_plus()}}, {{"z", z}});
}

FiniteDistribution dist(std::vector<double> w) {
    FiniteDistribution d;
    d.weights = std::move(w);
    return d;
}

} // namespace

TEST_CASE("validate_model reports violations as data") {
    const auto frag = two_state_fragment();
    const auto good = canonical_psi_ontic(frag);
    REQUIRE(validate_model(good).empty());

    OntModel bad_sum;
    bad_sum.lambda_size = 2;
    bad_sum.preparations["p"] = dist({0.5, 0.5});
    ResponseFunction f1, f2;
    f1.values = {0.6, 0.5};
    f2.values = {0.6, 0.5};
    bad_sum.experiments["e"] = {{"a", f1}, {"b", f2}};
    const auto v1 = validate_model(bad_sum);
    REQUIRE(v1.size() == 1);
    REQUIRE(v1[0].location.find("experiment 'e'") != std::string::npos);
    REQUIRE(v1[0].magnitude == Approx(0.2).margin(1e-12));

    OntModel bad_weight;
    bad_weight.lambda_size = 2;
    bad_weight.preparations["p"] = dist({1.1, -0.1});
    const auto v2 = validate_model(bad_weight);
    REQUIRE(v2.size() == 1);
    REQUIRE(v2[0].location.find("preparation 'p'") != std::string::npos);
    REQUIRE(v2[0].message == "negative weight");
}

TEST_CASE("predicted_probability is the response expectation") {
    OntModel m;
    m.lambda_size = 2;
    m.preparations["uniform"] = dist({0.5, 0.5});
    m.preparations["point"] = dist({1.0, 0.0});
    ResponseFunction f1, f2;
    f1.values = {1.0, 0.0};
    f2.values = {0.0, 1.0};
    m.experiments["e"] = {{"a", f1}, {"b", f2}};
    REQUIRE(predicted_probability(m, "uniform", "e", "a") == Approx(0.5));

    ResponseFunction g1, g2;
    g1.values = {0.3, 0.8};
    g2.values = {0.7, 0.2};
    m.experiments["g"] = {{"a", g1}, {"b", g2}};
    REQUIRE(predicted_probability(m, "point", "g", "a") == Approx(0.3));

    REQUIRE_THROWS_AS(predicted_probability(m, "nope", "e", "a"), std::out_of_range);
    REQUIRE_THROWS_AS(predicted_probability(m, "point", "e", "zzz"), std::out_of_range);
}

TEST_CASE("canonical model of the PBR fragment matches Born statistics") {
    const auto frag = pbr_fragment();
    const auto m = canonical_psi_ontic(frag);
    REQUIRE(m.lambda_size == 4);
    REQUIRE(validate_model(m).empty());

    const auto born = born_probability(frag.preparation("psi,psi"), frag.experiment("pbr"),
                                       "xi1");
    REQUIRE(predicted_probability(m, "psi,psi", "pbr", "xi1") ==
            Approx(born).margin(1e-10));

    const auto rep = reproduces_fragment(m, frag, 1e-9);
    REQUIRE(rep.ok);
    REQUIRE(rep.max_deviation < 1e-12);

    const auto c = classify(m, frag);
    REQUIRE(c.psi_ontic);
    REQUIRE(!c.psi_epistemic);
    REQUIRE(!c.maximally_psi_epistemic); // nonorthogonal pairs with disjoint supports
}

TEST_CASE("reproduces_fragment flags a perturbed response") {
    const auto frag = two_state_fragment();
    auto m = canonical_psi_ontic(frag);
    // the atom carrying |zero> has weight 1; shifting its response by 0.05
    // shifts the statistic by exactly 0.05
    const auto& zero_dist = m.preparation("zero");
    std::size_t atom = 0;
    for (std::size_t l = 0; l < zero_dist.size(); ++l)
        if (zero_dist[l] > 0.5) atom = l;
    auto& resp = m.experiments["z"];
    resp[0].response.values[atom] += 0.05;
    resp[1].response.values[atom] -= 0.05;
    const auto rep = reproduces_fragment(m, frag, 1e-9);
    REQUIRE(!rep.ok);
    REQUIRE(rep.max_deviation == Approx(0.05).margin(1e-12));
    REQUIRE(rep.worst.preparation == "zero");
}

TEST_CASE("tv distance and classical overlap") {
    // the two coin-flip preparations: fair vs 2/3 heads
    const auto fair = dist({0.5, 0.5});
    const auto biased = dist({2.0 / 3.0, 1.0 / 3.0});
    REQUIRE(tv_distance(fair, biased) == Approx(1.0 / 6.0).margin(1e-12));
    REQUIRE(classical_overlap(fair, biased) == Approx(5.0 / 6.0).margin(1e-12));

    REQUIRE(tv_distance(fair, fair) == 0.0);
    REQUIRE(classical_overlap(fair, fair) == 1.0);

    const auto left = dist({1.0, 0.0});
    const auto right = dist({0.0, 1.0});
    REQUIRE(tv_distance(left, right) == 1.0);
    REQUIRE(classical_overlap(left, right) == 0.0);

    REQUIRE_THROWS_AS(tv_distance(fair, dist({1.0})), std::invalid_argument);

    std::mt19937_64 rng(21);
    for (int i = 0; i < 100; ++i) {
        const auto p = dist(testing::random_simplex(6, rng));
        const auto q = dist(testing::random_simplex(6, rng));
        REQUIRE(classical_overlap(p, q) + tv_distance(p, q) == Approx(1.0).margin(1e-15));
        REQUIRE(classical_overlap(p, q) == Approx(min_overlap_mass(p, q)).margin(1e-12));
        REQUIRE(tv_distance(p, q) == Approx(tv_distance(q, p)));
        const auto r = dist(testing::random_simplex(6, rng));
        REQUIRE(tv_distance(p, r) <= tv_distance(p, q) + tv_distance(q, r) + 1e-12);
    }
}

TEST_CASE("ontological distinctness is a support statement") {
    REQUIRE(ontologically_distinct(dist({1.0, 0.0}), dist({0.0, 1.0})));
    REQUIRE(!ontologically_distinct(dist({0.5, 0.5}), dist({2.0 / 3.0, 1.0 / 3.0})));

    // weights below the support tolerance do not count
    REQUIRE(ontologically_distinct(dist({1.0, 1e-13}), dist({0.0, 1.0})));
    REQUIRE(!ontologically_distinct(dist({1.0, 1e-11}), dist({0.0, 1.0})));

    std::mt19937_64 rng(22);
    for (int i = 0; i < 50; ++i) {
        const auto p = dist(testing::random_simplex(5, rng));
        const auto q = dist(testing::random_simplex(5, rng));
        if (ontologically_distinct(p, q))
            REQUIRE(tv_distance(p, q) == Approx(1.0).margin(1e-10));
    }
}

TEST_CASE("model distinguishability is fragment-relative") {
    const Experiment z = projective_experiment({{"0", ket0()}, {"1", ket1()}});
    const Fragment f(2, {{"zero", ket0()}, {"one", ket1()}}, {{"z", z}});
    const auto m = canonical_psi_ontic(f);
    REQUIRE(model_distinguishability(m, "zero", "one") == Approx(1.0).margin(1e-12));

    OntModel trivial;
    trivial.lambda_size = 2;
    trivial.preparations["a"] = dist({1.0, 0.0});
    trivial.preparations["b"] = dist({0.0, 1.0});
    ResponseFunction c1, c2;
    c1.values = {1.0, 1.0};
    c2.values = {0.0, 0.0};
    trivial.experiments["const"] = {{"x", c1}, {"y", c2}};
    REQUIRE(model_distinguishability(trivial, "a", "b") == Approx(0.0).margin(1e-15));
}

TEST_CASE("d <= delta over randomized models") {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 100; ++i) {
        const auto m = testing::random_model(rng, 3 + i % 6, 2 + i % 3, 1 + i % 3,
                                             2 + i % 3);
        std::vector<std::string> names;
        for (const auto& [n, d] : m.preparations) names.push_back(n);
        for (std::size_t a = 0; a < names.size(); ++a)
            for (std::size_t b = a + 1; b < names.size(); ++b) {
                const double d_model = model_distinguishability(m, names[a], names[b]);
                const double delta =
                    tv_distance(m.preparation(names[a]), m.preparation(names[b]));
                REQUIRE(d_model <= delta + 1e-9);
            }
    }
}

TEST_CASE("bayes posterior reproduces the coin-flip ratios") {
    const std::map<std::string, double> prior{{"P0", 0.5}, {"P1", 0.5}};
    const std::map<std::string, std::map<std::string, double>> cond{
        {"P0", {{"H", 0.5}, {"T", 0.5}}},
        {"P1", {{"H", 2.0 / 3.0}, {"T", 1.0 / 3.0}}}};

    const auto heads = bayes_posterior(prior, cond, "H");
    REQUIRE(heads.at("P1") / heads.at("P0") == Approx(4.0 / 3.0).margin(1e-14));

    const auto tails = bayes_posterior(prior, cond, "T");
    REQUIRE(tails.at("P1") / tails.at("P0") == Approx(2.0 / 3.0).margin(1e-14));

    // uninformative outcome leaves the prior untouched
    const std::map<std::string, std::map<std::string, double>> flat{
        {"P0", {{"H", 0.5}}}, {"P1", {{"H", 0.5}}}};
    const std::map<std::string, double> tilted{{"P0", 0.3}, {"P1", 0.7}};
    const auto same = bayes_posterior(tilted, flat, "H");
    REQUIRE(same.at("P0") == Approx(0.3).margin(1e-14));

    // posterior ratios are invariant under prior rescaling
    const std::map<std::string, double> scaled{{"P0", 1.5}, {"P1", 1.5}};
    const auto h2 = bayes_posterior(scaled, cond, "H");
    REQUIRE(h2.at("P1") / h2.at("P0") == Approx(4.0 / 3.0).margin(1e-14));

    const std::map<std::string, std::map<std::string, double>> zero{
        {"P0", {{"H", 0.0}}}, {"P1", {{"H", 0.0}}}};
    REQUIRE_THROWS_AS(bayes_posterior(prior, zero, "H"), std::invalid_argument);
}

TEST_CASE("canonical model edge cases") {
    const Experiment z = projective_experiment({{"0", ket0()}, {"1", ket1()}});
    const Fragment single(2, {{"only", ket0()}}, {{"z", z}});
    REQUIRE(canonical_psi_ontic(single).lambda_size == 1);

    const Fragment orth(2, {{"zero", ket0()}, {"one", ket1()}}, {{"z", z}});
    const auto m = canonical_psi_ontic(orth);
    REQUIRE(model_distinguishability(m, "zero", "one") == Approx(1.0));
    REQUIRE(tv_distance(m.preparation("zero"), m.preparation("one")) == Approx(1.0));
    // all pairs orthogonal: the canonical model is also maximally psi-epistemic
    const auto c = classify(m, orth);
    REQUIRE(c.psi_ontic);
    REQUIRE(c.maximally_psi_epistemic);
}

TEST_CASE("classify rejects non-reproducing models") {
    const auto frag = two_state_fragment();
    auto m = canonical_psi_ontic(frag);
    m.experiments["z"][0].response.values[0] = 0.3;
    m.experiments["z"][1].response.values[0] = 0.7;
    REQUIRE_THROWS_AS(classify(m, frag), std::invalid_argument);
}

TEST_CASE("antidistinguishing statistics forbid joint support") {
    // canonical PBR model: reproduction is exact, so no atom may carry all
    // four preparations
    const auto frag = pbr_fragment();
    const auto m = canonical_psi_ontic(frag);
    for (std::size_t l = 0; l < m.lambda_size; ++l) {
        double least = 1.0;
        for (const auto& name : pbr_pair_names()) least = std::min(least, m.preparation(name)[l]);
        REQUIRE(least <= 1e-10);
    }
}

TEST_CASE("discretized qubit model reproduces the qubit fragment") {
    const auto net = fibonacci_sphere(50);
    const auto built = discretized_qubit_model(10000, net);
    REQUIRE(validate_model(built.model).empty());

    const auto rep = reproduces_fragment(built.model, built.fragment, 2e-2);
    REQUIRE(rep.ok);

    // |0> measured along z gives + with probability one
    const auto along_z = discretized_qubit_model(10000, {Eigen::Vector3d(0, 0, 1)});
    REQUIRE(predicted_probability(along_z.model, "z0", "dir_0", "+") ==
            Approx(1.0).margin(2e-2));

    REQUIRE_THROWS_AS(discretized_qubit_model(100, net), std::invalid_argument);
}

// Independent quadrature oracle for the overlap of the two hemisphere-model
// densities: integrate min(p0, p+) over the sphere on a latitude-longitude
// grid, entirely outside the Fibonacci-sample construction.
namespace {
double sphere_overlap_oracle(const Eigen::Vector3d& b1, const Eigen::Vector3d& b2) {
    const int n_theta = 600, n_phi = 1200;
    double total = 0.0;
    for (int i = 0; i < n_theta; ++i) {
        const double theta = M_PI * (i + 0.5) / n_theta;
        for (int j = 0; j < n_phi; ++j) {
            const double phi = 2.0 * M_PI * (j + 0.5) / n_phi;
            const Eigen::Vector3d u(std::sin(theta) * std::cos(phi),
                                    std::sin(theta) * std::sin(phi), std::cos(theta));
            const double p1 = std::max(0.0, b1.dot(u)) / M_PI;
            const double p2 = std::max(0.0, b2.dot(u)) / M_PI;
            total += std::min(p1, p2) * std::sin(theta);
        }
    }
    return total * (M_PI / n_theta) * (2.0 * M_PI / n_phi);
}
} // namespace

TEST_CASE("discretized qubit model realizes the full quantum overlap") {
    // oracle first: the continuum overlap of the |0> and |+> densities
    const double oracle = sphere_overlap_oracle({0, 0, 1}, {1, 0, 0});
    REQUIRE(oracle == Approx(0.29289).margin(1e-3)); // 1 - 1/sqrt(2)

    const auto built = discretized_qubit_model(10000, fibonacci_sphere(20));
    const double omega =
        min_overlap_mass(built.model.preparation("z0"), built.model.preparation("x+"));
    REQUIRE(omega == Approx(0.29289).margin(2e-2));

    // the model is not psi-ontic: the two supports share the overlap mass
    REQUIRE(!ontologically_distinct(built.model.preparation("z0"),
                                    built.model.preparation("x+")));
    const auto c = classify(built.model, built.fragment, default_tolerances(), 2e-2);
    REQUIRE(!c.psi_ontic);
    REQUIRE(c.psi_epistemic);
}

TEST_CASE("discretized model distinguishability approaches the quantum value") {
    const auto built = discretized_qubit_model(10000, fibonacci_sphere(200));
    const double d = model_distinguishability(built.model, "z0", "x+");
    REQUIRE(d == Approx(0.70711).margin(0.03));
    REQUIRE(d <= tv_distance(built.model.preparation("z0"),
                             built.model.preparation("x+")) +
                     1e-9);
}
