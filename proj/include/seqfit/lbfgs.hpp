#pragma once

#include "seqfit/param_block.hpp"

#include <functional>
#include <string>
#include <vector>

namespace seqfit {

/// Scalar objective with gradient. Returns the value at x; when `gradient`
/// is non-null it must be filled with the exact derivative (same size as
/// x). Implementations may return +inf for infeasible probes (for example
/// a point behind the camera); the line search backs off from those.
class Objective {
  public:
    virtual ~Objective() = default;
    virtual double evaluate(const VecX& x, VecX* gradient) const = 0;
};

/// Adapter for lambdas.
class FunctionObjective final : public Objective {
  public:
    using Fn = std::function<double(const VecX&, VecX*)>;
    explicit FunctionObjective(Fn fn) : fn_(std::move(fn)) {}
    double evaluate(const VecX& x, VecX* gradient) const override { return fn_(x, gradient); }

  private:
    Fn fn_;
};

struct SolveOptions {
    int max_iterations = 300;
    double gradient_tolerance = 1e-6; // on max-norm, scaled by max(1, |f|)
    int history_size = 10;
    double wolfe_c1 = 1e-4;
    double wolfe_c2 = 0.9;
    int max_line_search_steps = 40;
};

struct SolveReport {
    double initial_loss = 0.0;
    double final_loss = 0.0;
    int iterations = 0;
    int evaluations = 0;
    double gradient_norm = 0.0; // max-norm at exit
    std::string termination; // "gradient", "max_iterations", "line_search", "stalled"
};

/// Bounded L-BFGS with strong-Wolfe line search. Frozen segments of the
/// block never move; bound projections are applied after each accepted
/// step (clearing the curvature history when they bite). Never returns a
/// point with a higher loss than the initial one.
SolveReport minimize(const Objective& objective, ParamBlock& block,
                     const SolveOptions& options = {});

/// Runs `minimize` once per schedule stage, warm-starting each stage from
/// the previous one. `make_stage_objective` returns the objective for a
/// stage index; `between_stages`, when set, may normalize parameters
/// (for example canonicalize axis-angle segments) between stages.
std::vector<SolveReport> run_stages(
    const std::function<const Objective&(int stage)>& make_stage_objective, int stage_count,
    ParamBlock& block, const SolveOptions& options = {},
    const std::function<void(ParamBlock&)>& between_stages = {});

} // namespace seqfit
