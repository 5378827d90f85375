#include "pnplab/flow_matching.hpp"

#include <cmath>
#include <utility>

#include "pnplab/adam.hpp"
#include "pnplab/errors.hpp"

namespace pnp {
namespace {

constexpr std::uint64_t kPriorTag = 1;
constexpr std::uint64_t kTimeTag = 2;
constexpr std::uint64_t kDropTag = 3;
constexpr std::uint64_t kDataTag = 4;

Batch field_of(const VectorFieldNet& net, const PathSample& batch) {
    if (batch.count() == 0) throw UsageError("loss on an empty batch");
    return net.evaluate(batch.z_t, batch.t, batch.cond);
}

}  // namespace

PathSample make_path_sample_at(const Batch& z1, std::span<const int> cond, const Batch& z0, std::span<const double> t) {
    require_same_shape(z1.sample_shape(), z0.sample_shape(), "make_path_sample");
    if (z0.count() != z1.count() || t.size() != z1.count())
        throw ConfigError("make_path_sample: z0, z1 and t counts differ");
    if (!cond.empty() && cond.size() != z1.count()) throw ConfigError("make_path_sample: class id count mismatch");
    require_finite(z1, "make_path_sample z1");

    PathSample p;
    p.z0 = z0;
    p.z1 = z1;
    p.t.assign(t.begin(), t.end());
    p.cond.assign(cond.begin(), cond.end());
    if (p.cond.empty()) p.cond.assign(z1.count(), kNullClass);

    Eigen::MatrixXd zt(z1.matrix().rows(), z1.matrix().cols());
    for (Eigen::Index j = 0; j < zt.cols(); ++j) {
        const double tj = p.t[static_cast<std::size_t>(j)];
        zt.col(j) = (1.0 - tj) * z0.matrix().col(j) + tj * z1.matrix().col(j);
    }
    p.z_t = Batch(z1.sample_shape(), std::move(zt));
    p.target_v = Batch(z1.sample_shape(), z1.matrix() - z0.matrix());
    return p;
}

PathSample make_path_sample(const Batch& z1, std::span<const int> cond, RngStream& rng, const TimeLaw& law,
                            double p_drop) {
    if (!(p_drop >= 0.0 && p_drop <= 1.0)) throw ConfigError("p_drop must lie in [0, 1]");
    RngStream prior = rng.split(kPriorTag);
    RngStream times = rng.split(kTimeTag);
    RngStream drops = rng.split(kDropTag);
    rng.next_u64();  // the parent stream advances so successive calls differ

    Batch z0(z1.sample_shape(), z1.count());
    prior.fill_normal({z0.matrix().data(), static_cast<std::size_t>(z0.matrix().size())});
    std::vector<double> t(z1.count());
    for (double& v : t) v = law.draw(times);
    std::vector<int> c(cond.begin(), cond.end());
    if (c.empty()) c.assign(z1.count(), kNullClass);
    for (int& id : c)
        if (drops.uniform() < p_drop) id = kNullClass;
    return make_path_sample_at(z1, c, z0, t);
}

double fm_loss(const VectorFieldNet& net, const PathSample& batch) {
    const Batch u = field_of(net, batch);
    return (u.matrix() - batch.target_v.matrix()).colwise().squaredNorm().sum() / static_cast<double>(batch.count());
}

double dae_loss_weighted(const VectorFieldNet& net, const PathSample& batch) {
    for (double t : batch.t)
        if (!(t < 1.0)) throw DomainError("dae_loss_weighted: weight 1/(1-t)^2 is undefined at t = 1");
    const Batch u = field_of(net, batch);
    double total = 0.0;
    for (Eigen::Index j = 0; j < u.matrix().cols(); ++j) {
        const double s = 1.0 - batch.t[static_cast<std::size_t>(j)];
        const Eigen::VectorXd z1_hat = batch.z_t.matrix().col(j) + s * u.matrix().col(j);
        total += (z1_hat - batch.z1.matrix().col(j)).squaredNorm() / (s * s);
    }
    return total / static_cast<double>(batch.count());
}

void TrainConfig::validate() const {
    if (batch_size == 0) throw ConfigError("train: batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("train: learning_rate must be > 0");
    if (!(t_law.delta > 0.0 && t_law.delta < 0.5)) throw ConfigError("train: t_delta must lie in (0, 0.5)");
    if (!(p_drop >= 0.0 && p_drop <= 1.0)) throw ConfigError("train: p_drop must lie in [0, 1]");
}

TrainResult train(const DatasetSpec& spec, VectorFieldNet net, const TrainConfig& config,
                  const TrainProgress& progress) {
    config.validate();
    spec.validate();
    require_same_shape(net.architecture().grid_shape, spec.sample_shape(), "train");
    const bool conditional = net.architecture().conditional();
    if (conditional && net.architecture().num_classes != spec.label_count())
        throw ConfigError("train: network class count does not match dataset labels");

    TrainResult result{std::move(net), {}};
    result.losses.reserve(config.steps);
    OptimizerState opt = make_optimizer_state(result.net.parameters(), AdamConfig{config.learning_rate});
    const RngStream root(config.seed);

    for (std::size_t step = 0; step < config.steps; ++step) {
        RngStream rng = root.split(step);
        RngStream data_rng = rng.split(kDataTag);
        DatasetBatch data = sample_dataset(spec, config.batch_size, data_rng);
        std::vector<int> cond;
        if (conditional) cond = data.labels;
        const PathSample path = make_path_sample(data.samples, cond, rng, config.t_law, conditional ? config.p_drop : 0.0);

        LossAndGradients lg = loss_and_gradients(result.net, path.z_t, path.t, path.target_v, path.cond);
        if (!std::isfinite(lg.loss)) {
            throw NumericError("training diverged at step " + std::to_string(step) + " (loss is not finite)");
        }
        optimizer_step(opt, result.net, lg.gradients);
        result.losses.push_back(lg.loss);
        if (progress) progress(step, lg.loss);
    }
    return result;
}

}  // namespace pnp
