#include "seqfit/lbfgs.hpp"

#include "seqfit/errors.hpp"

#include <cmath>
#include <deque>

namespace seqfit {

namespace {

bool finite(double v) { return std::isfinite(v); }

struct LineSearchResult {
    bool ok = false;
    double alpha = 0.0;
    double f = 0.0;
    VecX g;
};

// Strong-Wolfe line search (bracket + zoom with bisection). Non-finite
// trial values are treated as "stepped too far".
LineSearchResult line_search(const Objective& objective, const VecX& x, double f0, const VecX& g0,
                             const VecX& direction, double alpha_init, const SolveOptions& opts,
                             int& evaluations) {
    LineSearchResult result;
    const double dphi0 = g0.dot(direction);
    if (!(dphi0 < 0.0)) return result;

    const double c1 = opts.wolfe_c1;
    const double c2 = opts.wolfe_c2;
    VecX g_trial(x.size());

    auto eval = [&](double alpha, double& f, double& dphi) {
        const VecX trial = x + alpha * direction;
        f = objective.evaluate(trial, &g_trial);
        ++evaluations;
        dphi = finite(f) ? g_trial.dot(direction) : 0.0;
    };

    auto accept = [&](double alpha, double f) {
        result.ok = true;
        result.alpha = alpha;
        result.f = f;
        result.g = g_trial;
    };

    // Keep the best Armijo point as a fallback when the curvature
    // condition cannot be met within the step budget.
    double fallback_alpha = 0.0, fallback_f = f0;
    auto remember_fallback = [&](double alpha, double f) {
        if (f < fallback_f) {
            fallback_alpha = alpha;
            fallback_f = f;
        }
    };

    double lo = 0.0, f_lo = f0;
    double hi = -1.0, f_hi = 0.0; // hi < 0 means "not bracketed yet"
    double alpha = alpha_init;
    double alpha_prev = 0.0, f_prev = f0;

    int steps = 0;
    for (; steps < opts.max_line_search_steps && hi < 0.0; ++steps) {
        double f, dphi;
        eval(alpha, f, dphi);
        if (!finite(f)) {
            hi = alpha;
            f_hi = f;
            break;
        }
        if (f > f0 + c1 * alpha * dphi0 || (steps > 0 && f >= f_prev)) {
            lo = alpha_prev;
            f_lo = f_prev;
            hi = alpha;
            f_hi = f;
            break;
        }
        remember_fallback(alpha, f);
        if (std::abs(dphi) <= -c2 * dphi0) {
            accept(alpha, f);
            return result;
        }
        if (dphi >= 0.0) {
            lo = alpha;
            f_lo = f;
            hi = alpha_prev;
            f_hi = f_prev;
            break;
        }
        alpha_prev = alpha;
        f_prev = f;
        alpha = std::min(2.0 * alpha, 1e12);
    }

    if (hi < 0.0) {
        // Budget exhausted while still extending; fall back if possible.
        if (fallback_alpha > 0.0) {
            // g_trial may belong to a later probe; re-evaluate at fallback.
            double f, dphi;
            eval(fallback_alpha, f, dphi);
            accept(fallback_alpha, f);
        }
        return result;
    }

    for (; steps < opts.max_line_search_steps; ++steps) {
        const double mid = 0.5 * (lo + hi);
        double f, dphi;
        eval(mid, f, dphi);
        if (!finite(f) || f > f0 + c1 * mid * dphi0 || f >= f_lo) {
            hi = mid;
            f_hi = f;
        } else {
            remember_fallback(mid, f);
            if (std::abs(dphi) <= -c2 * dphi0) {
                accept(mid, f);
                return result;
            }
            if (dphi * (hi - lo) >= 0.0) {
                hi = lo;
                f_hi = f_lo;
            }
            lo = mid;
            f_lo = f;
        }
        if (std::abs(hi - lo) < 1e-16 * std::max(1.0, std::abs(lo))) break;
    }

    if (fallback_alpha > 0.0 && fallback_f < f0) {
        double f, dphi;
        eval(fallback_alpha, f, dphi);
        accept(fallback_alpha, f);
    }
    return result;
}

} // namespace

SolveReport minimize(const Objective& objective, ParamBlock& block, const SolveOptions& options) {
    SolveReport report;
    const int n = block.size();
    VecX& x = block.values;
    block.project_to_bounds();

    VecX g(n);
    double f = objective.evaluate(x, &g);
    ++report.evaluations;
    if (!finite(f)) throw SolverError("objective is not finite at the initial point");
    block.apply_freeze(g);

    report.initial_loss = f;
    VecX best_x = x;
    double best_f = f;

    std::deque<VecX> s_hist, y_hist;
    std::deque<double> rho_hist;

    VecX q(n), direction(n);
    std::vector<double> alpha_coeffs;

    int iter = 0;
    report.termination = "max_iterations";
    for (; iter < options.max_iterations; ++iter) {
        const double gnorm = g.lpNorm<Eigen::Infinity>();
        report.gradient_norm = gnorm;
        if (gnorm < options.gradient_tolerance * std::max(1.0, std::abs(f))) {
            report.termination = "gradient";
            break;
        }

        // Two-loop recursion.
        q = g;
        const int m = static_cast<int>(s_hist.size());
        alpha_coeffs.assign(m, 0.0);
        for (int i = m - 1; i >= 0; --i) {
            alpha_coeffs[i] = rho_hist[i] * s_hist[i].dot(q);
            q -= alpha_coeffs[i] * y_hist[i];
        }
        if (m > 0) {
            const double gamma =
                s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
            q *= gamma;
        }
        for (int i = 0; i < m; ++i) {
            const double beta = rho_hist[i] * y_hist[i].dot(q);
            q += (alpha_coeffs[i] - beta) * s_hist[i];
        }
        direction = -q;

        if (g.dot(direction) >= 0.0) {
            // History no longer yields a descent direction.
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            direction = -g;
        }

        const double alpha_init =
            (iter == 0 && m == 0) ? 1.0 / std::max(1.0, g.norm()) : 1.0;
        const VecX x_old = x;
        const VecX g_old = g;
        const double f_old = f;
        LineSearchResult ls = line_search(objective, x, f, g, direction, alpha_init, options,
                                          report.evaluations);
        if (!ls.ok) {
            report.termination = "line_search";
            break;
        }

        x = x_old + ls.alpha * direction;
        f = ls.f;
        g = ls.g;
        block.apply_freeze(g);

        if (block.project_to_bounds()) {
            // Bounds bit: curvature history refers to the unconstrained
            // trajectory, so drop it and re-evaluate at the projected point.
            f = objective.evaluate(x, &g);
            ++report.evaluations;
            block.apply_freeze(g);
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            if (!finite(f)) {
                x = best_x;
                f = objective.evaluate(x, &g);
                ++report.evaluations;
                block.apply_freeze(g);
                report.termination = "line_search";
                break;
            }
        } else {
            VecX s = x - x_old;
            VecX y = g - g_old;
            const double sy = s.dot(y);
            if (sy > 1e-12 * s.norm() * y.norm()) {
                s_hist.push_back(std::move(s));
                y_hist.push_back(std::move(y));
                rho_hist.push_back(1.0 / sy);
                if (static_cast<int>(s_hist.size()) > options.history_size) {
                    s_hist.pop_front();
                    y_hist.pop_front();
                    rho_hist.pop_front();
                }
            }
        }

        if (f < best_f) {
            best_f = f;
            best_x = x;
        }

        if (f_old - f <= 0.0 && report.termination == "max_iterations") {
            // No measurable progress; stop rather than loop in place.
            report.termination = "stalled";
            ++iter;
            break;
        }
    }

    report.iterations = iter;
    if (best_f < f) {
        x = best_x;
        f = best_f;
    }
    report.final_loss = f;
    return report;
}

std::vector<SolveReport> run_stages(
    const std::function<const Objective&(int stage)>& make_stage_objective, int stage_count,
    ParamBlock& block, const SolveOptions& options,
    const std::function<void(ParamBlock&)>& between_stages) {
    std::vector<SolveReport> reports;
    reports.reserve(static_cast<size_t>(stage_count));
    for (int stage = 0; stage < stage_count; ++stage) {
        reports.push_back(minimize(make_stage_objective(stage), block, options));
        if (between_stages) between_stages(block);
    }
    return reports;
}

} // namespace seqfit
