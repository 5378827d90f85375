#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "pnplab/datasets.hpp"
#include "pnplab/grid.hpp"
#include "pnplab/rng.hpp"
#include "pnplab/vector_field_net.hpp"

namespace pnp {

/// Training times are drawn uniformly on (delta, 1 - delta).
struct TimeLaw {
    double delta = 0.005;

    double draw(RngStream& rng) const { return rng.uniform(delta, 1.0 - delta); }
};

/**
 * Points on the straight path z_t = (1 - t) z0 + t z1 with regression
 * target z1 - z0, one column per sample.
 */
struct PathSample {
    Batch z0;
    Batch z1;
    std::vector<double> t;
    Batch z_t;
    Batch target_v;
    std::vector<int> cond;

    std::size_t count() const { return z1.count(); }
};

/// Path samples at given times and prior draws.
PathSample make_path_sample_at(const Batch& z1, std::span<const int> cond, const Batch& z0, std::span<const double> t);

/// Draws z0 ~ N(0, I) and t from `law`; each class id is replaced by the null id with probability `p_drop`.
PathSample make_path_sample(const Batch& z1, std::span<const int> cond, RngStream& rng, const TimeLaw& law,
                            double p_drop = 0.0);

/// Mean over the batch of ||u(z_t, t) - (z1 - z0)||^2.
double fm_loss(const VectorFieldNet& net, const PathSample& batch);

/// Mean over the batch of ||z1_hat - z1||^2 / (1 - t)^2 with z1_hat = z_t + (1 - t) u(z_t, t).
double dae_loss_weighted(const VectorFieldNet& net, const PathSample& batch);

struct TrainConfig {
    std::size_t steps = 20000;
    std::size_t batch_size = 256;
    double learning_rate = 1e-3;
    TimeLaw t_law;
    double p_drop = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct TrainResult {
    VectorFieldNet net;
    std::vector<double> losses;
};

using TrainProgress = std::function<void(std::size_t step, double loss)>;

/**
 * Runs `config.steps` Adam steps on fm_loss over fresh dataset batches.
 *
 * Batch k is drawn from the stream split(k) of the config seed, so a run is
 * a pure function of (spec, initial net, config). Conditional networks are
 * fed the dataset labels. Throws NumericError naming the step if the loss
 * stops being finite.
 */
TrainResult train(const DatasetSpec& spec, VectorFieldNet net, const TrainConfig& config,
                  const TrainProgress& progress = {});

}  // namespace pnp
