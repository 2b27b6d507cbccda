/// Central numerical tolerance configuration.
///
/// Every check in the library compares against a named slack from this
/// struct rather than a literal scattered at the call site.  The defaults
/// are the values assumed throughout the test suite; override per call
/// where an operation accepts a Tolerances argument.

#pragma once

namespace ontic {

struct Tolerances {
    // state / operator invariants
    double state_norm = 1e-12;       // | ||psi||^2 - 1 |
    double hermitian = 1e-12;        // entrywise |E - E^dagger|
    double effect_min_eig = 1e-10;   // eigenvalues of an effect may dip this far below 0
    double povm_completeness = 1e-10;// entrywise |sum E_k - I|
    double born_sum = 1e-10;         // outcome probabilities summing to one

    // ontological model invariants
    double dist_norm = 1e-10;        // |sum_lambda P(lambda) - 1|
    double response_range = 1e-12;   // response values outside [0,1]
    double response_sum = 1e-10;     // |sum_k f_k(lambda) - 1|
    double support = 1e-12;          // weights above this count as support

    // derived-quantity comparisons
    double phase_equal = 1e-10;      // projective state equality via |<a|b>|
    double classification = 1e-6;    // maximal psi-epistemicity equality
    double reproduction = 1e-9;      // model statistics vs Born statistics

    // linear programming
    double lp_feasibility = 1e-9;
    double lp_certificate = 1e-7;
    double lp_pivot = 1e-10;

    // theorem bound slack
    double bound_slack = 1e-7;
    double unique_determination = 1e-9; // posterior mass counting as "determined"
};

inline const Tolerances& default_tolerances() {
    static const Tolerances tols{};
    return tols;
}

} // namespace ontic
