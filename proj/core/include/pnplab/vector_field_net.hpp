#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pnplab/grid.hpp"
#include "pnplab/rng.hpp"

namespace pnp {

enum class Activation { silu, tanh, relu };

std::string to_string(Activation a);
Activation parse_activation(const std::string& name);

/// Class id used for unconditional passes. Maps to the last row of the condition table.
inline constexpr int kNullClass = -1;

struct NetArchitecture {
    Shape grid_shape = kPointShape;
    std::vector<std::size_t> hidden{64, 64};
    Activation activation = Activation::silu;
    /// Number of sinusoidal time features (even, >= 2).
    std::size_t time_features = 16;
    /// Conditional classes; 0 disables the condition embedding.
    std::size_t num_classes = 0;
    std::size_t cond_dim = 0;

    std::size_t grid_dim() const { return grid_shape.size(); }
    std::size_t input_dim() const { return grid_dim() + time_features + cond_dim; }
    bool conditional() const { return num_classes > 0 && cond_dim > 0; }
    void validate() const;

    friend bool operator==(const NetArchitecture&, const NetArchitecture&) = default;
};

/// Dense parameter tensors in declaration order: W0, b0, ..., WL, bL[, condition table].
using ParameterSet = std::vector<Eigen::MatrixXd>;

/**
 * Feed-forward vector field u(z, t[, cond]).
 *
 * Input is [flattened z; sin/cos time features; condition embedding]; the
 * output has the flattened grid dimension. Biases are stored as n x 1
 * matrices so every parameter is handled uniformly by optimizers and
 * checkpoints.
 */
class VectorFieldNet {
public:
    /// All parameters zero.
    explicit VectorFieldNet(NetArchitecture arch);
    /// Xavier-uniform weights, zero biases, N(0, 0.1^2) condition table.
    static VectorFieldNet initialized(NetArchitecture arch, RngStream& rng);

    const NetArchitecture& architecture() const { return arch_; }
    ParameterSet& parameters() { return params_; }
    const ParameterSet& parameters() const { return params_; }
    std::size_t parameter_count() const;

    std::size_t layer_count() const { return arch_.hidden.size() + 1; }

    /// Evaluates every column of `z` with its own time and class id.
    Batch evaluate(const Batch& z, std::span<const double> t, std::span<const int> cond) const;
    Batch evaluate(const Batch& z, double t, int cond = kNullClass) const;

    /// Network input matrix for a batch (exposed for tests and gradient code).
    Eigen::MatrixXd assemble_input(const Batch& z, std::span<const double> t, std::span<const int> cond) const;

    std::vector<double> flatten() const;
    void assign(std::span<const double> flat);

    friend bool operator==(const VectorFieldNet&, const VectorFieldNet&);

private:
    std::size_t cond_row(int cond) const;

    NetArchitecture arch_;
    ParameterSet params_;
};

/// Sinusoidal features of t: sin(w_j t), cos(w_j t) with w_j geometric in [1, 100].
Eigen::VectorXd time_embedding(double t, std::size_t features);

/// u_theta(z, t[, cond]) for a single grid.
Grid evaluate_field(const VectorFieldNet& net, const Grid& z, double t, std::optional<int> cond = std::nullopt);

struct LossAndGradients {
    double loss = 0.0;
    ParameterSet gradients;
};

/// Mean over the batch of ||u(z_t, t, cond) - target||^2 and its exact gradient.
LossAndGradients loss_and_gradients(const VectorFieldNet& net, const Batch& z_t, std::span<const double> t,
                                    const Batch& target, std::span<const int> cond);

}  // namespace pnp
