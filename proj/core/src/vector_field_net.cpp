#include "pnplab/vector_field_net.hpp"

#include <cmath>
#include <utility>

#include "pnplab/errors.hpp"

namespace pnp {
namespace {

constexpr double kMaxTimeFrequency = 100.0;

double activate(Activation a, double x) {
    switch (a) {
        case Activation::silu: return x / (1.0 + std::exp(-x));
        case Activation::tanh: return std::tanh(x);
        case Activation::relu: return x > 0.0 ? x : 0.0;
    }
    return x;
}

double activate_derivative(Activation a, double x) {
    switch (a) {
        case Activation::silu: {
            const double s = 1.0 / (1.0 + std::exp(-x));
            return s * (1.0 + x * (1.0 - s));
        }
        case Activation::tanh: {
            const double th = std::tanh(x);
            return 1.0 - th * th;
        }
        case Activation::relu: return x > 0.0 ? 1.0 : 0.0;
    }
    return 1.0;
}

void add_bias(Eigen::MatrixXd& m, const Eigen::MatrixXd& bias) { m.colwise() += bias.col(0); }

}  // namespace

std::string to_string(Activation a) {
    switch (a) {
        case Activation::silu: return "silu";
        case Activation::tanh: return "tanh";
        case Activation::relu: return "relu";
    }
    return "unknown";
}

Activation parse_activation(const std::string& name) {
    if (name == "silu") return Activation::silu;
    if (name == "tanh") return Activation::tanh;
    if (name == "relu") return Activation::relu;
    throw ConfigError("unknown activation '" + name + "'");
}

void NetArchitecture::validate() const {
    if (grid_shape.size() == 0) throw ConfigError("architecture: empty grid shape");
    if (time_features < 2 || time_features % 2 != 0)
        throw ConfigError("architecture: time_features must be even and >= 2");
    for (std::size_t h : hidden)
        if (h == 0) throw ConfigError("architecture: hidden layer of width 0");
    if ((num_classes == 0) != (cond_dim == 0))
        throw ConfigError("architecture: num_classes and cond_dim must both be zero or both positive");
}

VectorFieldNet::VectorFieldNet(NetArchitecture arch) : arch_(std::move(arch)) {
    arch_.validate();
    std::size_t fan_in = arch_.input_dim();
    for (std::size_t l = 0; l < layer_count(); ++l) {
        const std::size_t fan_out = l < arch_.hidden.size() ? arch_.hidden[l] : arch_.grid_dim();
        params_.push_back(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(fan_out), static_cast<Eigen::Index>(fan_in)));
        params_.push_back(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(fan_out), 1));
        fan_in = fan_out;
    }
    if (arch_.conditional()) {
        params_.push_back(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(arch_.cond_dim),
                                                static_cast<Eigen::Index>(arch_.num_classes + 1)));
    }
}

VectorFieldNet VectorFieldNet::initialized(NetArchitecture arch, RngStream& rng) {
    VectorFieldNet net(std::move(arch));
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        Eigen::MatrixXd& w = net.params_[2 * l];
        const double bound = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = rng.uniform(-bound, bound);
    }
    if (net.arch_.conditional()) {
        Eigen::MatrixXd& table = net.params_.back();
        for (Eigen::Index c = 0; c < table.cols(); ++c)
            for (Eigen::Index r = 0; r < table.rows(); ++r) table(r, c) = 0.1 * rng.normal();
    }
    return net;
}

std::size_t VectorFieldNet::parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += static_cast<std::size_t>(p.size());
    return n;
}

Eigen::VectorXd time_embedding(double t, std::size_t features) {
    const std::size_t half = features / 2;
    Eigen::VectorXd e(static_cast<Eigen::Index>(features));
    const double step = half > 1 ? std::log(kMaxTimeFrequency) / static_cast<double>(half - 1) : 0.0;
    for (std::size_t j = 0; j < half; ++j) {
        const double w = std::exp(step * static_cast<double>(j));
        e(static_cast<Eigen::Index>(j)) = std::sin(w * t);
        e(static_cast<Eigen::Index>(half + j)) = std::cos(w * t);
    }
    return e;
}

std::size_t VectorFieldNet::cond_row(int cond) const {
    if (cond == kNullClass) return arch_.num_classes;
    if (cond < 0 || static_cast<std::size_t>(cond) >= arch_.num_classes) {
        throw ConfigError("class id " + std::to_string(cond) + " outside [0, " + std::to_string(arch_.num_classes) +
                          ")");
    }
    return static_cast<std::size_t>(cond);
}

Eigen::MatrixXd VectorFieldNet::assemble_input(const Batch& z, std::span<const double> t,
                                               std::span<const int> cond) const {
    require_same_shape(arch_.grid_shape, z.sample_shape(), "evaluate_field");
    const std::size_t n = z.count();
    if (t.size() != n) throw ConfigError("evaluate_field: time count does not match batch");
    if (!cond.empty() && cond.size() != n) throw ConfigError("evaluate_field: class id count does not match batch");

    const auto gd = static_cast<Eigen::Index>(arch_.grid_dim());
    const auto tf = static_cast<Eigen::Index>(arch_.time_features);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(arch_.input_dim()), static_cast<Eigen::Index>(n));
    x.topRows(gd) = z.matrix();
    for (std::size_t j = 0; j < n; ++j) {
        const auto col = static_cast<Eigen::Index>(j);
        if (!(t[j] >= 0.0 && t[j] <= 1.0)) throw DomainError("evaluate_field: t outside [0, 1]");
        x.block(gd, col, tf, 1) = time_embedding(t[j], arch_.time_features);
        const int c = cond.empty() ? kNullClass : cond[j];
        if (arch_.conditional()) {
            x.block(gd + tf, col, static_cast<Eigen::Index>(arch_.cond_dim), 1) =
                params_.back().col(static_cast<Eigen::Index>(cond_row(c)));
        } else if (c != kNullClass) {
            throw ConfigError("class id given to an unconditional network");
        }
    }
    return x;
}

Batch VectorFieldNet::evaluate(const Batch& z, std::span<const double> t, std::span<const int> cond) const {
    Eigen::MatrixXd h = assemble_input(z, t, cond);
    for (std::size_t l = 0; l < layer_count(); ++l) {
        Eigen::MatrixXd next = params_[2 * l] * h;
        add_bias(next, params_[2 * l + 1]);
        if (l + 1 < layer_count()) next = next.unaryExpr([a = arch_.activation](double v) { return activate(a, v); });
        h = std::move(next);
    }
    return Batch(arch_.grid_shape, std::move(h));
}

Batch VectorFieldNet::evaluate(const Batch& z, double t, int cond) const {
    const std::vector<double> ts(z.count(), t);
    const std::vector<int> cs(z.count(), cond);
    return evaluate(z, ts, cs);
}

std::vector<double> VectorFieldNet::flatten() const {
    std::vector<double> flat;
    flat.reserve(parameter_count());
    for (const auto& p : params_)
        for (Eigen::Index r = 0; r < p.rows(); ++r)
            for (Eigen::Index c = 0; c < p.cols(); ++c) flat.push_back(p(r, c));
    return flat;
}

void VectorFieldNet::assign(std::span<const double> flat) {
    if (flat.size() != parameter_count()) {
        throw ConfigError("weight count " + std::to_string(flat.size()) + " does not match architecture (" +
                          std::to_string(parameter_count()) + ")");
    }
    std::size_t i = 0;
    for (auto& p : params_)
        for (Eigen::Index r = 0; r < p.rows(); ++r)
            for (Eigen::Index c = 0; c < p.cols(); ++c) p(r, c) = flat[i++];
}

bool operator==(const VectorFieldNet& a, const VectorFieldNet& b) {
    if (!(a.arch_ == b.arch_) || a.params_.size() != b.params_.size()) return false;
    for (std::size_t i = 0; i < a.params_.size(); ++i)
        if (a.params_[i] != b.params_[i]) return false;
    return true;
}

Grid evaluate_field(const VectorFieldNet& net, const Grid& z, double t, std::optional<int> cond) {
    const Batch b = Batch::from_grids(std::span<const Grid>(&z, 1));
    return net.evaluate(b, t, cond.value_or(kNullClass)).sample(0);
}

LossAndGradients loss_and_gradients(const VectorFieldNet& net, const Batch& z_t, std::span<const double> t,
                                    const Batch& target, std::span<const int> cond) {
    if (z_t.count() == 0) throw UsageError("loss_and_gradients: empty batch");
    require_same_shape(z_t.sample_shape(), target.sample_shape(), "loss_and_gradients");
    if (target.count() != z_t.count()) throw ConfigError("loss_and_gradients: target count mismatch");

    const auto& arch = net.architecture();
    const auto& params = net.parameters();
    const std::size_t layers = net.layer_count();
    const double n = static_cast<double>(z_t.count());

    // Forward pass keeping pre-activations and layer inputs.
    std::vector<Eigen::MatrixXd> inputs;
    std::vector<Eigen::MatrixXd> pre;
    inputs.push_back(net.assemble_input(z_t, t, cond));
    for (std::size_t l = 0; l < layers; ++l) {
        Eigen::MatrixXd z = params[2 * l] * inputs.back();
        add_bias(z, params[2 * l + 1]);
        pre.push_back(z);
        if (l + 1 < layers)
            inputs.push_back(z.unaryExpr([a = arch.activation](double v) { return activate(a, v); }));
    }

    const Eigen::MatrixXd residual = pre.back() - target.matrix();
    LossAndGradients out;
    out.loss = residual.colwise().squaredNorm().sum() / n;
    out.gradients.resize(params.size());

    Eigen::MatrixXd delta = (2.0 / n) * residual;
    for (std::size_t l = layers; l-- > 0;) {
        out.gradients[2 * l] = delta * inputs[l].transpose();
        out.gradients[2 * l + 1] = delta.rowwise().sum();
        Eigen::MatrixXd back = params[2 * l].transpose() * delta;
        if (l > 0) {
            const Eigen::MatrixXd d = pre[l - 1].unaryExpr([a = arch.activation](double v) {
                return activate_derivative(a, v);
            });
            delta = back.cwiseProduct(d);
        } else {
            delta = std::move(back);
        }
    }

    if (arch.conditional()) {
        Eigen::MatrixXd& table_grad = out.gradients.back();
        table_grad = Eigen::MatrixXd::Zero(params.back().rows(), params.back().cols());
        const auto offset = static_cast<Eigen::Index>(arch.grid_dim() + arch.time_features);
        const auto cd = static_cast<Eigen::Index>(arch.cond_dim);
        for (std::size_t j = 0; j < z_t.count(); ++j) {
            const int c = cond.empty() ? kNullClass : cond[j];
            const auto row = c == kNullClass ? static_cast<Eigen::Index>(arch.num_classes) : static_cast<Eigen::Index>(c);
            table_grad.col(row) += delta.block(offset, static_cast<Eigen::Index>(j), cd, 1);
        }
    }
    return out;
}

}  // namespace pnp
