/// Dense linear programming with certificates, plus the two model-fitting
/// applications: fitting preparation distributions to reproduce a fragment
/// under fixed response functions, and maximizing the classical overlap of
/// a preparation pair subject to reproduction.
///
/// The solver is a two-phase tableau simplex.  Pivoting is deterministic:
/// most-negative reduced cost with lowest-index tie-breaking, switching to
/// Bland's rule after a degeneracy stall, so identical inputs give
/// identical outputs and cycling terminates.  Problems here are small
/// (<= 5000 variables); speed is traded for verifiability — an "optimal"
/// result always carries duals that close the objective gap, and an
/// "infeasible" result a Farkas vector, both re-checked before returning.

#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ontic/omodel.hpp"

namespace ontic {

enum class LpSense { Minimize, Maximize };
enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LinearProgram {
    LpSense sense = LpSense::Maximize;
    std::vector<double> objective;
    std::vector<std::vector<double>> eq_rows;
    std::vector<double> eq_rhs;
    std::vector<std::vector<double>> le_rows;
    std::vector<double> le_rhs;
    std::vector<double> lower; // per-variable; -inf allowed
    std::vector<double> upper; // per-variable; +inf allowed

    std::size_t n_vars() const { return objective.size(); }

    void add_eq(std::vector<double> row, double rhs) {
        eq_rows.push_back(std::move(row));
        eq_rhs.push_back(rhs);
    }
    void add_le(std::vector<double> row, double rhs) {
        le_rows.push_back(std::move(row));
        le_rhs.push_back(rhs);
    }
};

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    std::vector<double> values;     // original variable space (Optimal only)
    double objective_value = 0.0;

    // certificate data
    std::vector<double> dual_eq;          // Optimal: one multiplier per eq row
    std::vector<double> dual_le;          // Optimal: one multiplier per le row
    std::vector<double> farkas_eq;        // Infeasible: Farkas vector, eq part
    std::vector<double> farkas_le;        // Infeasible: Farkas vector, le part
    std::vector<double> ray;              // Unbounded: improving direction

    // residuals from the solver's own verification pass
    double primal_residual = 0.0;     // worst violation of eq/le/bounds
    double certificate_gap = 0.0;     // |primal obj - dual bound| (canonical form)
    double complementarity = 0.0;     // worst |reduced cost * value|
};

namespace lpdetail {

constexpr double inf = std::numeric_limits<double>::infinity();

// Canonical form: minimize c.z  s.t.  A z = b, z >= 0, with bookkeeping to
// map z back to the user's x.  Upper bounds become extra rows with slacks.
struct Canonical {
    std::size_t n = 0;                   // canonical variable count
    std::size_t m = 0;                   // row count
    std::vector<std::vector<double>> a;  // m x n
    std::vector<double> b;               // m
    std::vector<double> c;               // n
    double obj_offset = 0.0;
    double obj_sign = 1.0;               // +1 min, -1 max (applied on output)

    // x_j = shift_j + z[pos_j] (- z[neg_j] when the variable is free)
    std::vector<double> shift;
    std::vector<int> pos, neg;

    std::size_t n_eq = 0, n_le = 0;      // original row counts (canonical rows
                                         // are ordered: eq, le, upper-bound)
};

inline Canonical canonicalize(const LinearProgram& p) {
    const std::size_t nx = p.n_vars();
    detail::require(p.lower.size() == nx && p.upper.size() == nx,
                    "LinearProgram: bounds size mismatch");
    for (const auto& r : p.eq_rows)
        detail::require(r.size() == nx, "LinearProgram: eq row size mismatch");
    for (const auto& r : p.le_rows)
        detail::require(r.size() == nx, "LinearProgram: le row size mismatch");
    detail::require(p.eq_rhs.size() == p.eq_rows.size() && p.le_rhs.size() == p.le_rows.size(),
                    "LinearProgram: rhs size mismatch");
    for (std::size_t j = 0; j < nx; ++j)
        detail::require(p.lower[j] <= p.upper[j], "LinearProgram: lower > upper");

    Canonical cf;
    cf.obj_sign = (p.sense == LpSense::Maximize) ? -1.0 : 1.0;
    cf.shift.assign(nx, 0.0);
    cf.pos.assign(nx, -1);
    cf.neg.assign(nx, -1);

    std::size_t nz = 0;
    for (std::size_t j = 0; j < nx; ++j) {
        if (std::isfinite(p.lower[j])) {
            cf.shift[j] = p.lower[j];
            cf.pos[j] = static_cast<int>(nz++);
        } else {
            cf.pos[j] = static_cast<int>(nz++);
            cf.neg[j] = static_cast<int>(nz++);
        }
    }
    std::size_t n_ub = 0;
    for (std::size_t j = 0; j < nx; ++j)
        if (std::isfinite(p.upper[j])) ++n_ub;

    cf.n_eq = p.eq_rows.size();
    cf.n_le = p.le_rows.size();
    cf.m = cf.n_eq + cf.n_le + n_ub;
    cf.n = nz + cf.n_le + n_ub; // slacks for le rows and upper-bound rows
    cf.a.assign(cf.m, std::vector<double>(cf.n, 0.0));
    cf.b.assign(cf.m, 0.0);
    cf.c.assign(cf.n, 0.0);

    for (std::size_t j = 0; j < nx; ++j) {
        const double cj = cf.obj_sign * p.objective[j];
        cf.c[static_cast<std::size_t>(cf.pos[j])] += cj;
        if (cf.neg[j] >= 0) cf.c[static_cast<std::size_t>(cf.neg[j])] -= cj;
        cf.obj_offset += cj * cf.shift[j];
    }

    auto emit_row = [&](std::size_t r, const std::vector<double>& row, double rhs) {
        double shifted = rhs;
        for (std::size_t j = 0; j < nx; ++j) {
            if (row[j] == 0.0) continue;
            cf.a[r][static_cast<std::size_t>(cf.pos[j])] += row[j];
            if (cf.neg[j] >= 0) cf.a[r][static_cast<std::size_t>(cf.neg[j])] -= row[j];
            shifted -= row[j] * cf.shift[j];
        }
        cf.b[r] = shifted;
    };

    std::size_t r = 0;
    for (std::size_t i = 0; i < cf.n_eq; ++i, ++r) emit_row(r, p.eq_rows[i], p.eq_rhs[i]);
    for (std::size_t i = 0; i < cf.n_le; ++i, ++r) {
        emit_row(r, p.le_rows[i], p.le_rhs[i]);
        cf.a[r][nz + i] = 1.0; // slack
    }
    std::size_t ub = 0;
    for (std::size_t j = 0; j < nx; ++j) {
        if (!std::isfinite(p.upper[j])) continue;
        std::vector<double> row(nx, 0.0);
        row[j] = 1.0;
        emit_row(r, row, p.upper[j]);
        cf.a[r][nz + cf.n_le + ub] = 1.0; // slack
        ++r;
        ++ub;
    }
    return cf;
}

/// Tableau simplex over the canonical form.
class Simplex {
public:
    explicit Simplex(const Canonical& cf, const Tolerances& tol)
        : cf_(cf), tol_(tol), m_(cf.m), n_(cf.n) {}

    // Returns status; fills the public members below.
    LpStatus run() {
        build();
        phase_ = 1;
        if (!iterate()) throw std::runtime_error("solve_lp: iteration limit in phase 1");
        if (value(cost1_) > tol_.lp_feasibility) {
            extract_farkas();
            return LpStatus::Infeasible;
        }
        drive_out_artificials();
        phase_ = 2;
        if (!iterate()) throw std::runtime_error("solve_lp: iteration limit in phase 2");
        if (unbounded_) {
            return LpStatus::Unbounded;
        }
        extract_primal_dual();
        return LpStatus::Optimal;
    }

    std::vector<double> z;         // canonical primal
    std::vector<double> y;         // row duals (canonical-form convention)
    std::vector<double> farkas;    // row Farkas vector when infeasible
    std::vector<double> ray_z;     // canonical improving ray when unbounded
    double complementarity = 0.0;

private:
    const Canonical& cf_;
    const Tolerances& tol_;
    std::size_t m_, n_;
    // tableau: m_ rows x (n_ + m_ + 1) columns (structural, artificial, rhs)
    std::vector<std::vector<double>> t_;
    std::vector<double> cost1_, cost2_; // reduced-cost rows incl. rhs cell
    std::vector<int> basis_;
    std::vector<bool> dead_;
    int phase_ = 1;
    bool unbounded_ = false;
    int ray_col_ = -1;

    std::size_t width() const { return n_ + m_ + 1; }
    double value(const std::vector<double>& cost) const { return -cost[n_ + m_]; }

    void build() {
        t_.assign(m_, std::vector<double>(width(), 0.0));
        basis_.resize(m_);
        dead_.assign(m_, false);
        for (std::size_t i = 0; i < m_; ++i) {
            const double s = cf_.b[i] < 0.0 ? -1.0 : 1.0;
            for (std::size_t j = 0; j < n_; ++j) t_[i][j] = s * cf_.a[i][j];
            t_[i][n_ + i] = 1.0;
            t_[i][n_ + m_] = s * cf_.b[i];
            basis_[i] = static_cast<int>(n_ + i);
        }
        // phase-1 costs: artificials at 1; price out the initial basis
        cost1_.assign(width(), 0.0);
        for (std::size_t i = 0; i < m_; ++i)
            for (std::size_t col = 0; col < width(); ++col) cost1_[col] -= t_[i][col];
        for (std::size_t i = 0; i < m_; ++i) cost1_[n_ + i] += 1.0; // original cost 1 each
        // phase-2 costs: structural costs, artificials 0
        cost2_.assign(width(), 0.0);
        for (std::size_t j = 0; j < n_; ++j) cost2_[j] = cf_.c[j];
    }

    void pivot(std::size_t row, std::size_t col) {
        const double pv = t_[row][col];
        for (std::size_t k = 0; k < width(); ++k) t_[row][k] /= pv;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == row) continue;
            const double f = t_[i][col];
            if (f == 0.0) continue;
            for (std::size_t k = 0; k < width(); ++k) t_[i][k] -= f * t_[row][k];
        }
        for (auto* cost : {&cost1_, &cost2_}) {
            const double f = (*cost)[col];
            if (f == 0.0) continue;
            for (std::size_t k = 0; k < width(); ++k) (*cost)[k] -= f * t_[row][k];
        }
        basis_[row] = static_cast<int>(col);
    }

    bool iterate() {
        const auto& cost = (phase_ == 1) ? cost1_ : cost2_;
        const std::size_t max_iters = 50000 + 200 * (m_ + n_);
        std::size_t stall = 0;
        bool bland = false;
        double last = value(cost);
        for (std::size_t it = 0; it < max_iters; ++it) {
            const int col = choose_entering(cost, bland);
            if (col < 0) return true; // optimal for this phase
            const int row = choose_leaving(static_cast<std::size_t>(col));
            if (row < 0) {
                if (phase_ == 1) throw std::runtime_error("solve_lp: phase 1 unbounded");
                unbounded_ = true;
                ray_col_ = col;
                extract_ray(static_cast<std::size_t>(col));
                return true;
            }
            pivot(static_cast<std::size_t>(row), static_cast<std::size_t>(col));
            const double now = value(cost);
            if (std::abs(now - last) <= 1e-13)
                ++stall;
            else
                stall = 0;
            last = now;
            if (stall > 100) bland = true; // anti-cycling
        }
        return false;
    }

    int choose_entering(const std::vector<double>& cost, bool bland) const {
        // entering candidates are structural columns only
        int best = -1;
        double best_val = -tol_.lp_pivot;
        for (std::size_t j = 0; j < n_; ++j) {
            const double rc = cost[j];
            if (rc >= -tol_.lp_pivot) continue;
            if (bland) return static_cast<int>(j); // lowest index
            if (rc < best_val) {
                best_val = rc;
                best = static_cast<int>(j);
            }
        }
        return best;
    }

    int choose_leaving(std::size_t col) const {
        int best = -1;
        double best_ratio = 0.0;
        for (std::size_t i = 0; i < m_; ++i) {
            if (dead_[i]) continue;
            const double a = t_[i][col];
            if (a <= tol_.lp_pivot) continue;
            const double ratio = t_[i][n_ + m_] / a;
            if (best < 0 || ratio < best_ratio - 1e-15 ||
                (std::abs(ratio - best_ratio) <= 1e-15 &&
                 basis_[i] < basis_[static_cast<std::size_t>(best)])) {
                best = static_cast<int>(i);
                best_ratio = ratio;
            }
        }
        return best;
    }

    void drive_out_artificials() {
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] < static_cast<int>(n_)) continue;
            int col = -1;
            for (std::size_t j = 0; j < n_; ++j)
                if (std::abs(t_[i][j]) > tol_.lp_pivot) { col = static_cast<int>(j); break; }
            if (col >= 0) {
                pivot(i, static_cast<std::size_t>(col)); // degenerate, level zero
            } else {
                // redundant row: make it inert so later pivots cannot touch it
                dead_[i] = true;
                for (std::size_t j = 0; j < n_; ++j) t_[i][j] = 0.0;
            }
        }
    }

    void extract_primal_dual() {
        z.assign(n_, 0.0);
        for (std::size_t i = 0; i < m_; ++i)
            if (!dead_[i] && basis_[i] < static_cast<int>(n_))
                z[static_cast<std::size_t>(basis_[i])] = t_[i][n_ + m_];
        y.assign(m_, 0.0);
        for (std::size_t i = 0; i < m_; ++i)
            if (!dead_[i]) y[i] = -cost2_[n_ + i]; // artificial cost 0 in phase 2
        // row sign flips applied during build() belong to the duals
        for (std::size_t i = 0; i < m_; ++i)
            if (cf_.b[i] < 0.0) y[i] = -y[i];
        complementarity = 0.0;
        for (std::size_t j = 0; j < n_; ++j)
            complementarity = std::max(complementarity, std::abs(cost2_[j] * z[j]));
    }

    void extract_farkas() {
        farkas.assign(m_, 0.0);
        for (std::size_t i = 0; i < m_; ++i) {
            const double yi = 1.0 - cost1_[n_ + i];
            farkas[i] = (cf_.b[i] < 0.0) ? -yi : yi;
        }
    }

    void extract_ray(std::size_t col) {
        ray_z.assign(n_, 0.0);
        ray_z[col] = 1.0;
        for (std::size_t i = 0; i < m_; ++i) {
            if (dead_[i]) continue;
            if (basis_[i] < static_cast<int>(n_))
                ray_z[static_cast<std::size_t>(basis_[i])] = -t_[i][col];
        }
        for (auto& v : ray_z)
            if (std::abs(v) <= tol_.lp_pivot) v = 0.0;
    }
};

inline double primal_residual(const LinearProgram& p, const std::vector<double>& x) {
    double worst = 0.0;
    for (std::size_t i = 0; i < p.eq_rows.size(); ++i) {
        double s = -p.eq_rhs[i];
        for (std::size_t j = 0; j < p.n_vars(); ++j) s += p.eq_rows[i][j] * x[j];
        worst = std::max(worst, std::abs(s));
    }
    for (std::size_t i = 0; i < p.le_rows.size(); ++i) {
        double s = -p.le_rhs[i];
        for (std::size_t j = 0; j < p.n_vars(); ++j) s += p.le_rows[i][j] * x[j];
        worst = std::max(worst, s);
    }
    for (std::size_t j = 0; j < p.n_vars(); ++j) {
        if (std::isfinite(p.lower[j])) worst = std::max(worst, p.lower[j] - x[j]);
        if (std::isfinite(p.upper[j])) worst = std::max(worst, x[j] - p.upper[j]);
    }
    return worst;
}

} // namespace lpdetail

/// Solves the program.  Throws std::runtime_error on numeric breakdown
/// (an unverifiable result is never reported as Optimal).
inline LpSolution solve_lp(const LinearProgram& p,
                           const Tolerances& tol = default_tolerances()) {
    const auto cf = lpdetail::canonicalize(p);
    lpdetail::Simplex spx(cf, tol);
    LpSolution sol;
    sol.status = spx.run();

    const std::size_t nx = p.n_vars();
    if (sol.status == LpStatus::Optimal) {
        sol.values.assign(nx, 0.0);
        for (std::size_t j = 0; j < nx; ++j) {
            double v = cf.shift[j] + spx.z[static_cast<std::size_t>(cf.pos[j])];
            if (cf.neg[j] >= 0) v -= spx.z[static_cast<std::size_t>(cf.neg[j])];
            sol.values[j] = v;
        }
        double obj = 0.0;
        for (std::size_t j = 0; j < nx; ++j) obj += p.objective[j] * sol.values[j];
        sol.objective_value = obj;

        sol.dual_eq.assign(spx.y.begin(), spx.y.begin() + static_cast<long>(cf.n_eq));
        sol.dual_le.assign(spx.y.begin() + static_cast<long>(cf.n_eq),
                           spx.y.begin() + static_cast<long>(cf.n_eq + cf.n_le));

        // verification: primal feasibility, duality gap, complementary slackness
        sol.primal_residual = lpdetail::primal_residual(p, sol.values);
        double dual_bound = cf.obj_offset;
        for (std::size_t i = 0; i < cf.m; ++i) dual_bound += spx.y[i] * cf.b[i];
        const double primal_canon = cf.obj_sign * obj;
        sol.certificate_gap = std::abs(primal_canon - dual_bound);
        sol.complementarity = spx.complementarity;
        const double scale = 1.0 + std::abs(primal_canon);
        if (sol.primal_residual > tol.lp_feasibility ||
            sol.certificate_gap > tol.lp_certificate * scale ||
            sol.complementarity > tol.lp_certificate * scale)
            throw std::runtime_error("solve_lp: optimal solution failed residual verification");
    } else if (sol.status == LpStatus::Infeasible) {
        // Farkas vector over canonical rows: y.b > 0, y.A <= 0 on all columns.
        double yb = 0.0;
        std::vector<double> ya(cf.n, 0.0);
        for (std::size_t i = 0; i < cf.m; ++i) {
            yb += spx.farkas[i] * cf.b[i];
            for (std::size_t j = 0; j < cf.n; ++j) ya[j] += spx.farkas[i] * cf.a[i][j];
        }
        double worst = 0.0;
        for (std::size_t j = 0; j < cf.n; ++j) worst = std::max(worst, ya[j]);
        if (yb <= 0.0 || worst > tol.lp_certificate * (1.0 + std::abs(yb)))
            throw std::runtime_error("solve_lp: infeasibility certificate failed verification");
        // exported in the textbook orientation: multipliers u (free) on
        // equality rows and w >= 0 on <= rows such that the combined
        // constraint u.A_eq + w.A_le, minimized over the variable box,
        // still exceeds u.b_eq + w.b_le
        sol.farkas_eq.resize(cf.n_eq);
        for (std::size_t i = 0; i < cf.n_eq; ++i) sol.farkas_eq[i] = -spx.farkas[i];
        sol.farkas_le.resize(cf.n_le);
        for (std::size_t i = 0; i < cf.n_le; ++i)
            sol.farkas_le[i] = -spx.farkas[cf.n_eq + i];
    } else { // Unbounded
        sol.ray.assign(nx, 0.0);
        for (std::size_t j = 0; j < nx; ++j) {
            double v = spx.ray_z[static_cast<std::size_t>(cf.pos[j])];
            if (cf.neg[j] >= 0) v -= spx.ray_z[static_cast<std::size_t>(cf.neg[j])];
            sol.ray[j] = v;
        }
        double cd = 0.0;
        for (std::size_t j = 0; j < nx; ++j) cd += p.objective[j] * sol.ray[j];
        const double improving = (p.sense == LpSense::Maximize) ? cd : -cd;
        if (improving <= 0.0)
            throw std::runtime_error("solve_lp: unbounded ray failed verification");
        sol.objective_value = (p.sense == LpSense::Maximize)
                                  ? std::numeric_limits<double>::infinity()
                                  : -std::numeric_limits<double>::infinity();
    }
    return sol;
}

/// Plain-text listing of a program, for external cross-checks.
inline std::string lp_dump(const LinearProgram& p) {
    std::ostringstream os;
    os.precision(17);
    os << (p.sense == LpSense::Maximize ? "MAXIMIZE\n" : "MINIMIZE\n");
    for (std::size_t j = 0; j < p.n_vars(); ++j)
        if (p.objective[j] != 0.0) os << "  " << p.objective[j] << " x" << j << "\n";
    os << "SUBJECT TO\n";
    for (std::size_t i = 0; i < p.eq_rows.size(); ++i) {
        os << "  e" << i << ":";
        for (std::size_t j = 0; j < p.n_vars(); ++j)
            if (p.eq_rows[i][j] != 0.0) os << " " << p.eq_rows[i][j] << " x" << j;
        os << " = " << p.eq_rhs[i] << "\n";
    }
    for (std::size_t i = 0; i < p.le_rows.size(); ++i) {
        os << "  u" << i << ":";
        for (std::size_t j = 0; j < p.n_vars(); ++j)
            if (p.le_rows[i][j] != 0.0) os << " " << p.le_rows[i][j] << " x" << j;
        os << " <= " << p.le_rhs[i] << "\n";
    }
    os << "BOUNDS\n";
    for (std::size_t j = 0; j < p.n_vars(); ++j)
        os << "  " << p.lower[j] << " <= x" << j << " <= " << p.upper[j] << "\n";
    os << "END\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Model fitting
// ---------------------------------------------------------------------------

struct FitResult {
    bool feasible = false;
    OntModel model;                 // valid when feasible
    std::string infeasible_preparation; // first preparation whose LP is infeasible
};

namespace lpdetail {

/// Equality system for one preparation: normalization plus one row per
/// (experiment, outcome) statistic.  Response functions are fixed inputs.
inline void fit_rows(const Fragment& f, const std::string& prep,
                     const std::map<std::string, ExperimentResponses>& responses,
                     std::size_t lambda_size, std::size_t var_offset, std::size_t n_vars,
                     LinearProgram& p) {
    {
        std::vector<double> row(n_vars, 0.0);
        for (std::size_t l = 0; l < lambda_size; ++l) row[var_offset + l] = 1.0;
        p.add_eq(std::move(row), 1.0);
    }
    const PureState& state = f.preparation(prep);
    for (const auto& [ename, experiment] : f.experiments()) {
        auto rit = responses.find(ename);
        detail::require(rit != responses.end(),
                        "fit: responses missing experiment '" + ename + "'");
        for (const auto& [label, rf] : rit->second) {
            detail::require(rf.size() == lambda_size, "fit: response length mismatch");
            std::vector<double> row(n_vars, 0.0);
            for (std::size_t l = 0; l < lambda_size; ++l) row[var_offset + l] = rf[l];
            p.add_eq(std::move(row), born_probability(state, experiment, label));
        }
    }
}

} // namespace lpdetail

/// Finds preparation distributions over a fixed Lambda that reproduce the
/// fragment's statistics under the given response functions.  Each
/// preparation is an independent feasibility LP.
inline FitResult fit_preparations(const Fragment& f,
                                  const std::map<std::string, ExperimentResponses>& responses,
                                  std::size_t lambda_size,
                                  const Tolerances& tol = default_tolerances()) {
    FitResult out;
    out.model.lambda_size = lambda_size;
    out.model.experiments = responses;
    for (const auto& [pname, state] : f.preparations()) {
        LinearProgram p;
        p.sense = LpSense::Minimize;
        p.objective.assign(lambda_size, 0.0);
        p.lower.assign(lambda_size, 0.0);
        p.upper.assign(lambda_size, lpdetail::inf); // <= 1 implied by normalization
        lpdetail::fit_rows(f, pname, responses, lambda_size, 0, lambda_size, p);
        const LpSolution sol = solve_lp(p, tol);
        if (sol.status != LpStatus::Optimal) {
            out.feasible = false;
            out.infeasible_preparation = pname;
            return out;
        }
        FiniteDistribution d;
        d.weights = sol.values;
        for (auto& w : d.weights) w = std::max(0.0, w);
        out.model.preparations[pname] = std::move(d);
    }
    out.feasible = true;
    return out;
}

struct MaxOverlapResult {
    bool feasible = false;
    OntModel model;
    double omega_star = 0.0;
    std::string infeasible_preparation;
};

/// Maximizes classical overlap between two preparations subject to both
/// reproducing the fragment under the fixed responses.  Exact LP since
/// omega = sum_lambda min(P_A, P_B) on a finite Lambda: variables are
/// P_A, P_B and the pointwise min m with m <= P_A, m <= P_B.
inline MaxOverlapResult max_overlap_fit(const Fragment& f,
                                        const std::map<std::string, ExperimentResponses>& responses,
                                        std::size_t lambda_size, const std::string& prep_a,
                                        const std::string& prep_b,
                                        const Tolerances& tol = default_tolerances()) {
    MaxOverlapResult out;
    if (prep_a == prep_b) {
        // omega(P, P) = 1 for any fitted P
        auto fit = fit_preparations(f, responses, lambda_size, tol);
        out.feasible = fit.feasible;
        out.infeasible_preparation = fit.infeasible_preparation;
        if (fit.feasible) {
            out.model = std::move(fit.model);
            out.omega_star = 1.0;
        }
        return out;
    }

    const std::size_t n = 3 * lambda_size;
    LinearProgram p;
    p.sense = LpSense::Maximize;
    p.objective.assign(n, 0.0);
    for (std::size_t l = 0; l < lambda_size; ++l) p.objective[2 * lambda_size + l] = 1.0;
    p.lower.assign(n, 0.0);
    p.upper.assign(n, lpdetail::inf); // <= 1 implied by normalization
    lpdetail::fit_rows(f, prep_a, responses, lambda_size, 0, n, p);
    lpdetail::fit_rows(f, prep_b, responses, lambda_size, lambda_size, n, p);
    for (std::size_t l = 0; l < lambda_size; ++l) {
        std::vector<double> r1(n, 0.0), r2(n, 0.0);
        r1[2 * lambda_size + l] = 1.0;
        r1[l] = -1.0;
        p.add_le(std::move(r1), 0.0); // m <= P_A
        r2[2 * lambda_size + l] = 1.0;
        r2[lambda_size + l] = -1.0;
        p.add_le(std::move(r2), 0.0); // m <= P_B
    }
    const LpSolution sol = solve_lp(p, tol);
    if (sol.status == LpStatus::Infeasible) {
        out.feasible = false;
        return out;
    }
    detail::require(sol.status == LpStatus::Optimal, "max_overlap_fit: unexpected LP status");

    OntModel m;
    m.lambda_size = lambda_size;
    m.experiments = responses;
    FiniteDistribution da, db;
    da.weights.assign(sol.values.begin(), sol.values.begin() + static_cast<long>(lambda_size));
    db.weights.assign(sol.values.begin() + static_cast<long>(lambda_size),
                      sol.values.begin() + static_cast<long>(2 * lambda_size));
    for (auto& w : da.weights) w = std::max(0.0, w);
    for (auto& w : db.weights) w = std::max(0.0, w);
    m.preparations[prep_a] = da;
    m.preparations[prep_b] = db;

    // remaining preparations are independent feasibility problems
    for (const auto& [pname, state] : f.preparations()) {
        if (pname == prep_a || pname == prep_b) continue;
        Fragment sub(f.dim(), {{pname, state}}, f.experiments());
        auto fit = fit_preparations(sub, responses, lambda_size, tol);
        if (!fit.feasible) {
            out.feasible = false;
            out.infeasible_preparation = pname;
            return out;
        }
        m.preparations[pname] = fit.model.preparations.at(pname);
    }

    out.feasible = true;
    out.omega_star = min_overlap_mass(da, db);
    detail::require(std::abs(out.omega_star - sol.objective_value) <= 1e-8,
                    "max_overlap_fit: objective does not match recomputed overlap");
    out.model = std::move(m);
    return out;
}

} // namespace ontic
