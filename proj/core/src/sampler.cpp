#include "pnplab/sampler.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "pnplab/errors.hpp"

namespace pnp {
namespace {

/// z + dt * field; the single place an Euler update is computed.
Batch advance(const Batch& z, double dt, const Batch& field) {
    return Batch(z.sample_shape(), z.matrix() + dt * field.matrix());
}

void require_binary(const Batch& mask, const char* what) {
    const auto& m = mask.matrix();
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        const double v = m.data()[i];
        if (v != 0.0 && v != 1.0) throw UsageError(std::string(what) + ": mask values must be 0 or 1");
    }
}

std::size_t parse_index(std::string_view s, std::string_view whole) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw ConfigError("malformed P&P plan '" + std::string(whole) + "'");
    return v;
}

}  // namespace

Schedule::Schedule(std::vector<double> timesteps, Law law, double shift)
    : times_(std::move(timesteps)), law_(law), shift_(shift) {
    if (times_.size() < 2) throw ConfigError("schedule needs at least one step");
    if (times_.front() != 0.0 || times_.back() != 1.0) throw ConfigError("schedule must start at 0 and end at 1");
    for (std::size_t i = 1; i < times_.size(); ++i)
        if (!(times_[i] > times_[i - 1])) throw ConfigError("schedule must be strictly increasing");
}

Schedule::Schedule(std::vector<double> timesteps) : Schedule(std::move(timesteps), Law::custom, 1.0) {}

Schedule Schedule::uniform(std::size_t steps) { return shifted(steps, 1.0); }

Schedule Schedule::shifted(std::size_t steps, double shift) {
    if (steps == 0) throw ConfigError("schedule needs at least one step");
    if (!(shift > 0.0)) throw ConfigError("schedule shift must be > 0");
    std::vector<double> t(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i) {
        const double u = static_cast<double>(i) / static_cast<double>(steps);
        t[i] = shift == 1.0 ? u : u / (u + shift * (1.0 - u));
    }
    t.front() = 0.0;
    t.back() = 1.0;
    return Schedule(std::move(t), shift == 1.0 ? Law::uniform : Law::shifted, shift);
}

PnPPlan::PnPPlan(std::vector<PlanRange> ranges) : ranges_(std::move(ranges)) {
    std::sort(ranges_.begin(), ranges_.end(), [](const PlanRange& a, const PlanRange& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < ranges_.size(); ++i) {
        const auto& r = ranges_[i];
        if (r.last < r.first) throw ConfigError("P&P plan range " + std::to_string(r.first) + "-" +
                                                std::to_string(r.last) + " is reversed");
        if (r.iterations == 0) throw ConfigError("P&P plan ranges need K >= 1");
        if (i > 0 && r.first <= ranges_[i - 1].last) throw ConfigError("P&P plan ranges overlap");
    }
}

PnPPlan PnPPlan::parse(std::string_view text) {
    std::vector<PlanRange> ranges;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find(',', pos);
        if (end == std::string_view::npos) end = text.size();
        const std::string_view item = text.substr(pos, end - pos);
        pos = end + 1;
        if (item.find_first_not_of(' ') == std::string_view::npos) {
            if (end == text.size() && ranges.empty()) break;
            throw ConfigError("malformed P&P plan '" + std::string(text) + "'");
        }
        const std::size_t colon = item.find(':');
        if (colon == std::string_view::npos) throw ConfigError("malformed P&P plan '" + std::string(text) + "'");
        const std::string_view span = item.substr(0, colon);
        PlanRange r;
        const std::size_t dash = span.find('-');
        r.first = parse_index(span.substr(0, dash), text);
        r.last = dash == std::string_view::npos ? r.first : parse_index(span.substr(dash + 1), text);
        r.iterations = parse_index(item.substr(colon + 1), text);
        ranges.push_back(r);
    }
    return PnPPlan(std::move(ranges));
}

PnPPlan PnPPlan::early(std::size_t total_steps, std::size_t first, double fraction, std::size_t iterations) {
    const auto end = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(total_steps) - 1e-9));
    if (iterations == 0 || end == 0 || first > end - 1) return {};
    return PnPPlan({{first, std::min(end, total_steps) - 1, iterations}});
}

std::size_t PnPPlan::iterations_at(std::size_t step) const {
    for (const auto& r : ranges_)
        if (step >= r.first && step <= r.last) return r.iterations;
    return 0;
}

std::size_t PnPPlan::extra_evaluations() const {
    std::size_t n = 0;
    for (const auto& r : ranges_) n += (r.last - r.first + 1) * r.iterations;
    return n;
}

std::size_t PnPPlan::planned_steps() const {
    std::size_t n = 0;
    for (const auto& r : ranges_) n += r.last - r.first + 1;
    return n;
}

double PnPPlan::coverage(std::size_t total_steps) const {
    if (ranges_.empty() || total_steps == 0) return 0.0;
    return static_cast<double>(ranges_.back().last) / static_cast<double>(total_steps);
}

void PnPPlan::validate(std::size_t total_steps) const {
    for (const auto& r : ranges_)
        if (r.last >= total_steps)
            throw ConfigError("P&P plan references step " + std::to_string(r.last) + " but the schedule has " +
                              std::to_string(total_steps) + " steps");
}

PnPPlan PnPPlan::with_iterations(std::size_t k) const {
    if (k == 0) return {};
    std::vector<PlanRange> r = ranges_;
    for (auto& x : r) x.iterations = k;
    return PnPPlan(std::move(r));
}

std::string PnPPlan::str() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < ranges_.size(); ++i) {
        const auto& r = ranges_[i];
        if (i) os << ',';
        os << r.first;
        if (r.last != r.first) os << '-' << r.last;
        os << ':' << r.iterations;
    }
    return os.str();
}

std::string to_string(NfeCounting m) { return m == NfeCounting::per_call ? "per-call" : "per-pass"; }

NfeCounting parse_nfe_counting(const std::string& name) {
    if (name == "per-call") return NfeCounting::per_call;
    if (name == "per-pass") return NfeCounting::per_pass;
    throw ConfigError("unknown NFE counting mode '" + name + "'");
}

FieldEvaluator::FieldEvaluator(const VectorFieldNet& net, CfgSpec cfg) : net_(&net), cfg_(cfg) {
    if (cfg_.enabled && !(cfg_.scale >= 0.0)) throw ConfigError("CFG scale must be >= 0");
}

Batch FieldEvaluator::operator()(const Batch& z, double t) {
    ++calls_;
    if (!cfg_.enabled) {
        ++passes_;
        return net_->evaluate(z, t, cfg_.cond);
    }
    passes_ += 2;
    const Batch u_null = net_->evaluate(z, t, kNullClass);
    const Batch u_cond = net_->evaluate(z, t, cfg_.cond);
    return Batch(z.sample_shape(), u_null.matrix() + cfg_.scale * (u_cond.matrix() - u_null.matrix()));
}

EulerResult euler_step(FieldEvaluator& field, const Batch& z, double t_i, double t_next) {
    if (!(t_i < t_next && t_next <= 1.0)) throw DomainError("euler_step: need t_i < t_next <= 1");
    Batch u = field(z, t_i);
    require_finite(u, "euler_step field");
    Batch next = advance(z, t_next - t_i, u);
    return {std::move(next), std::move(u)};
}

Batch predict_endpoint(const Batch& z, double t, const Batch& field) {
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("predict_endpoint: t outside [0, 1]");
    require_same_shape(z.sample_shape(), field.sample_shape(), "predict_endpoint");
    return Batch(z.sample_shape(), z.matrix() + (1.0 - t) * field.matrix());
}

Batch perturb(const Batch& z, double t, RngStream& rng) {
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("perturb: t outside [0, 1]");
    Eigen::MatrixXd eps(z.matrix().rows(), z.matrix().cols());
    rng.fill_normal({eps.data(), static_cast<std::size_t>(eps.size())});
    return Batch(z.sample_shape(), t * z.matrix() + (1.0 - t) * eps);
}

PnPResult pnp_iteration(FieldEvaluator& field, const Batch& z_t, double t, RngStream& rng) {
    if (!(t < 1.0)) throw DomainError("pnp_iteration: refinement is undefined at t = 1");
    const Batch u = field(z_t, t);
    require_finite(u, "pnp_iteration field");
    Batch endpoint = predict_endpoint(z_t, t, u);
    Batch refined = perturb(endpoint, t, rng);
    return {std::move(refined), std::move(endpoint)};
}

Batch refined_euler_step(FieldEvaluator& field, const Batch& z_t, double t_i, double t_next, std::size_t iterations,
                         const RngStream& step_rng) {
    Batch z = z_t;
    for (std::size_t k = 1; k <= iterations; ++k) {
        RngStream rng = iteration_stream(step_rng, k);
        z = pnp_iteration(field, z, t_i, rng).refined;
    }
    return euler_step(field, z, t_i, t_next).next;
}

Batch uncertainty_map(const Batch& prev, const Batch& cur) {
    if (!(prev.sample_shape() == cur.sample_shape()) || prev.count() != cur.count())
        throw UsageError("uncertainty_map: predictions differ in shape or count");
    const Shape& s = prev.sample_shape();
    const auto channels = static_cast<Eigen::Index>(s.channels);
    const auto locations = static_cast<Eigen::Index>(s.locations());
    Batch map(s.single_channel(), prev.count());
    const auto diff = (prev.matrix() - cur.matrix()).cwiseAbs().eval();
    for (Eigen::Index j = 0; j < diff.cols(); ++j) {
        for (Eigen::Index l = 0; l < locations; ++l) {
            double sum = 0.0;
            for (Eigen::Index c = 0; c < channels; ++c) sum += diff(l * channels + c, j);
            map.matrix()(l, j) = sum / static_cast<double>(channels);
        }
    }
    return map;
}

Batch uncertainty_mask(const Batch& map, double tau, const Batch& prev_mask) {
    require_same_shape(map.sample_shape(), prev_mask.sample_shape(), "uncertainty_mask");
    if (map.sample_shape().channels != 1) throw UsageError("uncertainty_mask: map must have one channel");
    if (map.count() != prev_mask.count()) throw ConfigError("uncertainty_mask: batch sizes differ");
    require_binary(prev_mask, "uncertainty_mask");
    Batch out(map.sample_shape(), map.count());
    const auto& m = map.matrix();
    const auto& p = prev_mask.matrix();
    for (Eigen::Index i = 0; i < m.size(); ++i)
        out.matrix().data()[i] = (m.data()[i] > tau || p.data()[i] == 1.0) ? 1.0 : 0.0;
    return out;
}

Batch masked_blend(const Batch& mask, const Batch& refined, const Batch& kept) {
    if (!(refined.sample_shape() == kept.sample_shape()))
        throw UsageError("masked_blend: shape mismatch " + refined.sample_shape().str() + " vs " +
                         kept.sample_shape().str());
    if (!(mask.sample_shape() == refined.sample_shape().single_channel()))
        throw UsageError("masked_blend: mask shape " + mask.sample_shape().str() + " does not broadcast to " +
                         refined.sample_shape().str());
    if (mask.count() != refined.count() || kept.count() != refined.count())
        throw UsageError("masked_blend: batch sizes differ");
    require_binary(mask, "masked_blend");
    const auto channels = static_cast<Eigen::Index>(refined.sample_shape().channels);
    Batch out = kept;
    for (Eigen::Index j = 0; j < mask.matrix().cols(); ++j)
        for (Eigen::Index l = 0; l < mask.matrix().rows(); ++l)
            if (mask.matrix()(l, j) == 1.0)
                for (Eigen::Index c = 0; c < channels; ++c)
                    out.matrix()(l * channels + c, j) = refined.matrix()(l * channels + c, j);
    return out;
}

Batch initial_noise(const Shape& shape, std::size_t n, const RngStream& rng) {
    Batch z(shape, n);
    RngStream noise = rng.split(kInitialNoiseTag);
    noise.fill_normal({z.matrix().data(), static_cast<std::size_t>(z.matrix().size())});
    return z;
}

SampleRun sample_from(FieldEvaluator& field, const Schedule& schedule, const PnPPlan& plan, double tau,
                      const Batch& z_init, const RngStream& rng, const SampleOptions& options) {
    plan.validate(schedule.steps());
    if (std::isnan(tau)) throw ConfigError("tau must not be NaN");
    const std::uint64_t nfe_start = field.nfe(options.counting);

    SampleRun run;
    run.seed = rng.seed();
    Batch z = z_init;
    for (std::size_t i = 0; i < schedule.steps(); ++i) {
        const double t = schedule[i];
        const double dt = schedule[i + 1] - t;
        const std::size_t iterations = plan.iterations_at(i);
        const bool logging = options.log == LogLevel::all || (options.log == LogLevel::planned && iterations > 0);

        EulerResult base = euler_step(field, z, t, schedule[i + 1]);
        StepLog entry;
        if (logging) {
            entry.step = i;
            entry.t = t;
            entry.z = z;
        }

        if (iterations == 0) {
            if (logging) entry.endpoints.push_back(predict_endpoint(z, t, base.field));
            z = std::move(base.next);
        } else {
            const RngStream step_rng = rng.split(i);
            PnPBuffer buffer{predict_endpoint(z, t, base.field), std::move(base.next),
                             Batch(z.sample_shape().single_channel(), z.count())};
            if (logging) entry.endpoints.push_back(buffer.pred_z1);
            for (std::size_t k = 1; k <= iterations; ++k) {
                RngStream noise = iteration_stream(step_rng, k);
                const Batch z_pnp = perturb(buffer.pred_z1, t, noise);
                const Batch u = field(z_pnp, t);
                require_finite(u, "sample field");
                const Batch cand_z1 = predict_endpoint(z_pnp, t, u);
                const Batch cand_next = advance(z_pnp, dt, u);
                Batch unc = uncertainty_map(buffer.pred_z1, cand_z1);
                Batch mask = uncertainty_mask(unc, tau, buffer.mask);
                buffer.pred_z1 = masked_blend(mask, cand_z1, buffer.pred_z1);
                buffer.pred_z_next = masked_blend(mask, cand_next, buffer.pred_z_next);
                if (logging) {
                    entry.endpoints.push_back(buffer.pred_z1);
                    entry.masks.push_back(mask);
                    entry.uncertainty.push_back(std::move(unc));
                }
                buffer.mask = std::move(mask);
            }
            z = std::move(buffer.pred_z_next);
        }
        if (logging) {
            entry.nfe_after = field.nfe(options.counting) - nfe_start;
            run.log.push_back(std::move(entry));
        }
    }
    run.samples = std::move(z);
    run.nfe_used = field.nfe(options.counting) - nfe_start;
    return run;
}

SampleRun sample(const VectorFieldNet& net, const Schedule& schedule, const PnPPlan& plan, double tau,
                 const CfgSpec& cfg, std::size_t n, const RngStream& rng, const SampleOptions& options) {
    if (n == 0) throw ConfigError("sample: n must be >= 1");
    FieldEvaluator field(net, cfg);
    return sample_from(field, schedule, plan, tau, initial_noise(net.architecture().grid_shape, n, rng), rng, options);
}

std::uint64_t nfe_total(const Schedule& schedule, const PnPPlan& plan, NfeCounting mode, bool cfg_enabled) {
    plan.validate(schedule.steps());
    const std::uint64_t calls = schedule.steps() + plan.extra_evaluations();
    return (mode == NfeCounting::per_pass && cfg_enabled) ? 2 * calls : calls;
}

Batch euler_integrate(FieldEvaluator& field, const Batch& z, const Schedule& schedule, std::size_t from,
                      std::size_t to) {
    if (from > to || to > schedule.steps()) throw ConfigError("euler_integrate: bad step range");
    Batch cur = z;
    for (std::size_t i = from; i < to; ++i) cur = euler_step(field, cur, schedule[i], schedule[i + 1]).next;
    return cur;
}

std::vector<Batch> fixed_level_chain(FieldEvaluator& field, const Batch& z_t, double t, std::size_t iterations,
                                     const RngStream& step_rng) {
    std::vector<Batch> endpoints;
    Batch z = z_t;
    for (std::size_t k = 1; k <= iterations + 1; ++k) {
        RngStream rng = iteration_stream(step_rng, k);
        PnPResult r = pnp_iteration(field, z, t, rng);
        endpoints.push_back(std::move(r.endpoint));
        z = std::move(r.refined);
    }
    return endpoints;
}

}  // namespace pnp
