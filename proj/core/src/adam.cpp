#include "pnplab/adam.hpp"

#include <cmath>

#include "pnplab/errors.hpp"

namespace pnp {

OptimizerState make_optimizer_state(const ParameterSet& params, AdamConfig config) {
    OptimizerState s;
    s.config = config;
    for (const auto& p : params) {
        s.first_moment.push_back(Eigen::MatrixXd::Zero(p.rows(), p.cols()));
        s.second_moment.push_back(Eigen::MatrixXd::Zero(p.rows(), p.cols()));
    }
    return s;
}

void optimizer_step(OptimizerState& state, ParameterSet& params, const ParameterSet& gradients) {
    if (gradients.size() != params.size() || state.first_moment.size() != params.size())
        throw ConfigError("optimizer_step: parameter/gradient count mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (gradients[i].rows() != params[i].rows() || gradients[i].cols() != params[i].cols() ||
            state.first_moment[i].rows() != params[i].rows() || state.first_moment[i].cols() != params[i].cols())
            throw ConfigError("optimizer_step: shape mismatch in tensor " + std::to_string(i));
    }

    const auto& c = state.config;
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(c.beta1, t);
    const double correction2 = 1.0 - std::pow(c.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& m = state.first_moment[i];
        auto& v = state.second_moment[i];
        m = c.beta1 * m + (1.0 - c.beta1) * gradients[i];
        v = c.beta2 * v + (1.0 - c.beta2) * gradients[i].cwiseAbs2();
        params[i].array() -= c.learning_rate * (m.array() / correction1) /
                             ((v.array() / correction2).sqrt() + c.epsilon);
    }
}

}  // namespace pnp
