#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "pnplab/grid.hpp"
#include "pnplab/rng.hpp"
#include "pnplab/vector_field_net.hpp"

namespace pnp {

/// Strictly increasing times 0 = t_0 < ... < t_T = 1.
class Schedule {
public:
    enum class Law { uniform, shifted, custom };

    static Schedule uniform(std::size_t steps);
    /// Uniform grid mapped through t -> t / (t + s (1 - t)).
    static Schedule shifted(std::size_t steps, double shift);
    explicit Schedule(std::vector<double> timesteps);

    std::size_t steps() const { return times_.size() - 1; }
    double operator[](std::size_t i) const { return times_[i]; }
    const std::vector<double>& timesteps() const { return times_; }
    Law law() const { return law_; }
    double shift() const { return shift_; }

private:
    Schedule(std::vector<double> timesteps, Law law, double shift);

    std::vector<double> times_;
    Law law_ = Law::custom;
    double shift_ = 1.0;
};

struct PlanRange {
    std::size_t first = 0;  ///< inclusive outer step index
    std::size_t last = 0;   ///< inclusive
    std::size_t iterations = 1;

    friend bool operator==(const PlanRange&, const PlanRange&) = default;
};

/**
 * Mapping from outer step ranges to P&P iteration counts, e.g. "3-6:3,7-14:1".
 * Step indices are 0-based positions in the schedule's step loop.
 */
class PnPPlan {
public:
    PnPPlan() = default;
    explicit PnPPlan(std::vector<PlanRange> ranges);

    /// Parses "a-b:K,c-d:K" (a single step may be written "a:K"); empty text is the empty plan.
    static PnPPlan parse(std::string_view text);
    /// K iterations on steps [first, ceil(fraction * T) - 1]; empty when that range is empty.
    static PnPPlan early(std::size_t total_steps, std::size_t first, double fraction, std::size_t iterations);

    const std::vector<PlanRange>& ranges() const { return ranges_; }
    bool empty() const { return ranges_.empty(); }
    std::size_t iterations_at(std::size_t step) const;
    /// Sum of K over every planned step.
    std::size_t extra_evaluations() const;
    std::size_t planned_steps() const;
    /// Largest covered step divided by T (the interval rate alpha); 0 for the empty plan.
    double coverage(std::size_t total_steps) const;
    /// Throws ConfigError if a range is reversed, overlaps another, has K = 0 or reaches step >= total_steps.
    void validate(std::size_t total_steps) const;
    /// Same ranges with every K replaced; K = 0 yields the empty plan.
    PnPPlan with_iterations(std::size_t k) const;
    std::string str() const;

    friend bool operator==(const PnPPlan&, const PnPPlan&) = default;

private:
    std::vector<PlanRange> ranges_;
};

/// Classifier-free guidance: u = u_null + scale (u_cond - u_null) when enabled.
struct CfgSpec {
    bool enabled = false;
    double scale = 1.0;
    int cond = kNullClass;
};

/// How NFE is counted under CFG: one per combined evaluation, or one per network pass.
enum class NfeCounting { per_call, per_pass };

std::string to_string(NfeCounting m);
NfeCounting parse_nfe_counting(const std::string& name);

/// Network plus guidance, with evaluation counters.
class FieldEvaluator {
public:
    FieldEvaluator(const VectorFieldNet& net, CfgSpec cfg = {});

    Batch operator()(const Batch& z, double t);

    const VectorFieldNet& net() const { return *net_; }
    const CfgSpec& cfg() const { return cfg_; }
    std::uint64_t calls() const { return calls_; }
    std::uint64_t passes() const { return passes_; }
    std::uint64_t nfe(NfeCounting mode) const { return mode == NfeCounting::per_call ? calls_ : passes_; }

private:
    const VectorFieldNet* net_;
    CfgSpec cfg_;
    std::uint64_t calls_ = 0;
    std::uint64_t passes_ = 0;
};

struct EulerResult {
    Batch next;
    Batch field;
};

/// z + (t_next - t_i) u(z, t_i); the evaluated field is returned for reuse.
EulerResult euler_step(FieldEvaluator& field, const Batch& z, double t_i, double t_next);

/// Denoiser view of the flow: z + (1 - t) field.
Batch predict_endpoint(const Batch& z, double t, const Batch& field);

/// t z + (1 - t) eps with eps ~ N(0, I) drawn from `rng` in column order.
Batch perturb(const Batch& z, double t, RngStream& rng);

struct PnPResult {
    Batch refined;   ///< perturb(endpoint, t)
    Batch endpoint;  ///< predict_endpoint(z_t, t, u(z_t, t))
};

/// One Predict-then-Perturb cycle at fixed t; costs one field evaluation.
PnPResult pnp_iteration(FieldEvaluator& field, const Batch& z_t, double t, RngStream& rng);

/// Noise stream for iteration k (1-based) of an outer step.
inline RngStream iteration_stream(const RngStream& step_rng, std::size_t k) { return step_rng.split(k); }

/// K P&P iterations at t_i followed by one Euler step from the refined state.
/// Iteration k draws its noise from iteration_stream(step_rng, k).
Batch refined_euler_step(FieldEvaluator& field, const Batch& z_t, double t_i, double t_next, std::size_t iterations,
                         const RngStream& step_rng);

/// Per-location channel mean of |prev - cur|; shape (f, h, w, 1) per sample.
Batch uncertainty_map(const Batch& prev, const Batch& cur);

/// (map > tau) OR prev_mask, element-wise.
Batch uncertainty_mask(const Batch& map, double tau, const Batch& prev_mask);

/// Per-location select: mask ? refined : kept, broadcast over channels.
Batch masked_blend(const Batch& mask, const Batch& refined, const Batch& kept);

/// State carried between P&P iterations of one outer step.
struct PnPBuffer {
    Batch pred_z1;
    Batch pred_z_next;
    Batch mask;
};

struct StepLog {
    std::size_t step = 0;
    double t = 0.0;
    Batch z;                          ///< state entering the step
    std::vector<Batch> endpoints;     ///< blended endpoint after iteration k = 0..K
    std::vector<Batch> masks;         ///< accumulated mask after iteration k = 1..K
    std::vector<Batch> uncertainty;   ///< raw uncertainty map of iteration k = 1..K
    std::uint64_t nfe_after = 0;
};

enum class LogLevel {
    none,
    planned,  ///< only steps that run P&P iterations
    all,
};

struct SampleOptions {
    NfeCounting counting = NfeCounting::per_call;
    LogLevel log = LogLevel::none;
};

struct SampleRun {
    Batch samples;
    std::vector<StepLog> log;
    std::uint64_t nfe_used = 0;
    std::uint64_t seed = 0;
};

/// Tag of the stream that draws the initial noise; outer step i uses split(i).
inline constexpr std::uint64_t kInitialNoiseTag = ~std::uint64_t{0};

/// Initial noise for a run of n samples of `shape`.
Batch initial_noise(const Shape& shape, std::size_t n, const RngStream& rng);

/**
 * Uncertainty-aware self-refining sampler starting from z_init.
 *
 * Every outer step takes a base Euler step and keeps its field. On planned
 * steps the base field also gives the first endpoint prediction, then each
 * of the K iterations perturbs the previous blended endpoint, evaluates the
 * field once, forms candidate endpoint and next state, ORs (U > tau) into
 * the mask and blends both candidates into the buffer. The buffer's next
 * state becomes z_{t_{i+1}}. tau < 0 refines everywhere.
 */
SampleRun sample_from(FieldEvaluator& field, const Schedule& schedule, const PnPPlan& plan, double tau,
                      const Batch& z_init, const RngStream& rng, const SampleOptions& options = {});

/// sample_from with n samples of initial noise drawn from `rng`.
SampleRun sample(const VectorFieldNet& net, const Schedule& schedule, const PnPPlan& plan, double tau,
                 const CfgSpec& cfg, std::size_t n, const RngStream& rng, const SampleOptions& options = {});

/// Closed-form NFE of sample(): T plus the plan's extra evaluations, doubled for per-pass CFG.
std::uint64_t nfe_total(const Schedule& schedule, const PnPPlan& plan, NfeCounting mode, bool cfg_enabled);

/// Plain Euler integration over schedule steps [from, to).
Batch euler_integrate(FieldEvaluator& field, const Batch& z, const Schedule& schedule, std::size_t from,
                      std::size_t to);

/// Endpoint predictions z1_hat^(0..K) of an unmasked P&P chain held at time t.
std::vector<Batch> fixed_level_chain(FieldEvaluator& field, const Batch& z_t, double t, std::size_t iterations,
                                     const RngStream& step_rng);

}  // namespace pnp
