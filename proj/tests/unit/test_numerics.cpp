#include <cmath>
#include <vector>

#include "doctest.h"

#include "pnplab/adam.hpp"
#include "pnplab/errors.hpp"
#include "pnplab/grid.hpp"
#include "pnplab/rng.hpp"
#include "pnplab/vector_field_net.hpp"

using namespace pnp;

namespace {

NetArchitecture small_arch(Shape shape, std::size_t classes = 0) {
    NetArchitecture a;
    a.grid_shape = shape;
    a.hidden = {8, 6};
    a.time_features = 4;
    a.num_classes = classes;
    a.cond_dim = classes ? 3 : 0;
    return a;
}

Batch random_batch(Shape shape, std::size_t n, RngStream& rng) {
    Batch b(shape, n);
    rng.fill_normal({b.matrix().data(), static_cast<std::size_t>(b.matrix().size())});
    return b;
}

}  // namespace

TEST_CASE("grid shape bookkeeping") {
    Grid g(Shape{2, 3, 4, 5}, 1.5);
    CHECK(g.size() == 120);
    g.at(1, 2, 3, 4) = -2.0;
    CHECK(g[119] == -2.0);
    CHECK_THROWS_AS(Grid(Shape{1, 1, 1, 2}, std::vector<double>{1.0}), ConfigError);

    Grid points(Shape{1, 1, 3, 2}, std::vector<double>{1, 2, 3, 4, 5, 6});
    const Batch b = Batch::from_point_grid(points);
    CHECK(b.count() == 3);
    CHECK(b.sample(1) == Grid(kPointShape, {3, 4}));
    CHECK(b.to_point_grid() == points);
}

TEST_CASE("rng streams are reproducible and split independently") {
    RngStream a(42), b(42), c(43);
    bool all_equal = true;
    for (int i = 0; i < 1'000'000; ++i) all_equal &= a.next_u64() == b.next_u64();
    CHECK(all_equal);
    CHECK(RngStream(42).next_u64() != c.next_u64());

    // Counter addressing: restarting at a counter replays the same draw.
    RngStream d(9);
    for (int i = 0; i < 5; ++i) d.next_u64();
    RngStream e(9, 5);
    CHECK(d.next_u64() == e.next_u64());

    const RngStream root(5);
    CHECK(root.split(1).seed() != root.split(2).seed());
    CHECK(root.split(1).seed() == RngStream(5).split(1).seed());
}

TEST_CASE("standard normal moments") {
    RngStream rng(2024);
    const int n = 100'000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        sum += x;
        sq += x * x;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::abs(var - 1.0) < 0.1);
}

TEST_CASE("uniform index is in range") {
    RngStream rng(3);
    std::vector<int> hist(7, 0);
    for (int i = 0; i < 70'000; ++i) ++hist[rng.index(7)];
    for (int h : hist) CHECK(std::abs(h - 10'000) < 600);
}

TEST_CASE("zero-initialised net outputs zeros") {
    const VectorFieldNet net(small_arch(Shape{1, 2, 2, 3}));
    RngStream rng(1);
    const Batch z = random_batch(Shape{1, 2, 2, 3}, 5, rng);
    const Batch u = net.evaluate(z, 0.3);
    CHECK(u.sample_shape() == z.sample_shape());
    CHECK(u.matrix().isZero(0.0));
}

TEST_CASE("one-hidden-unit net matches hand arithmetic") {
    NetArchitecture a;
    a.grid_shape = Shape{1, 1, 1, 1};
    a.hidden = {1};
    a.activation = Activation::tanh;
    a.time_features = 2;
    VectorFieldNet net(a);
    // input = [z, sin(t), cos(t)] = [0.5, 0, 1] at t = 0
    net.parameters()[0] << 2.0, 0.3, -0.5;
    net.parameters()[1] << 0.1;
    net.parameters()[2] << 1.5;
    net.parameters()[3] << -0.2;
    const Grid out = evaluate_field(net, Grid(a.grid_shape, {0.5}), 0.0);
    const double hidden = std::tanh(2.0 * 0.5 + 0.3 * 0.0 - 0.5 * 1.0 + 0.1);
    CHECK(out[0] == doctest::Approx(1.5 * hidden - 0.2).epsilon(1e-15));
    CHECK(out[0] == doctest::Approx(0.6055743514).epsilon(1e-9));
}

TEST_CASE("evaluation is pure") {
    RngStream init(11);
    const auto net = VectorFieldNet::initialized(small_arch(Shape{2, 1, 1, 2}, 3), init);
    RngStream rng(12);
    const Batch z = random_batch(Shape{2, 1, 1, 2}, 4, rng);
    const std::vector<double> t{0.1, 0.2, 0.9, 1.0};
    const std::vector<int> c{0, kNullClass, 2, 1};
    CHECK(net.evaluate(z, t, c) == net.evaluate(z, t, c));
}

TEST_CASE("evaluation rejects bad input") {
    RngStream init(1);
    const auto net = VectorFieldNet::initialized(small_arch(kPointShape), init);
    CHECK_THROWS_AS(net.evaluate(Batch(Shape{1, 1, 1, 3}, 1), 0.5), ConfigError);
    CHECK_THROWS_AS(net.evaluate(Batch(kPointShape, 1), 1.5), DomainError);
    CHECK_THROWS_AS(net.evaluate(Batch(kPointShape, 1), 0.5, 0), ConfigError);
}

TEST_CASE("loss is zero when the net matches the target") {
    RngStream init(2);
    const auto net = VectorFieldNet::initialized(small_arch(kPointShape), init);
    RngStream rng(3);
    const Batch z = random_batch(kPointShape, 6, rng);
    const std::vector<double> t(6, 0.4);
    const Batch target = net.evaluate(z, t, {});
    const auto lg = loss_and_gradients(net, z, t, target, {});
    CHECK(lg.loss == 0.0);
    for (const auto& g : lg.gradients) CHECK(g.isZero(0.0));

    const Batch doubled(kPointShape, target.matrix() - 2.0 * (target.matrix() - z.matrix()));
    const double base = loss_and_gradients(net, z, t, z, {}).loss;
    CHECK(loss_and_gradients(net, z, t, doubled, {}).loss == doctest::Approx(4.0 * base).epsilon(1e-12));

    CHECK_THROWS_AS(loss_and_gradients(net, Batch(kPointShape, 0), {}, Batch(kPointShape, 0), {}), UsageError);
}

TEST_CASE("analytic gradients match central differences") {
    // 100 random (net, sample) pairs, 10 random parameters each.
    const double h = 1e-5;
    RngStream rng(77);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const bool conditional = trial % 2 == 0;
        const Shape shape = trial % 3 == 0 ? Shape{2, 2, 1, 1} : kPointShape;
        NetArchitecture arch = small_arch(shape, conditional ? 4 : 0);
        arch.activation = trial % 5 == 0 ? Activation::tanh : Activation::silu;
        auto net = VectorFieldNet::initialized(arch, rng);
        for (auto& p : net.parameters())
            for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] += 0.1 * rng.normal();

        const Batch z = random_batch(shape, 1, rng);
        const Batch v = random_batch(shape, 1, rng);
        const std::vector<double> t{rng.uniform()};
        const std::vector<int> cond{conditional ? static_cast<int>(rng.index(5)) - 1 : kNullClass};
        const auto lg = loss_and_gradients(net, z, t, v, cond);

        for (int probe = 0; probe < 10; ++probe) {
            const std::size_t tensor = rng.index(net.parameters().size());
            auto& p = net.parameters()[tensor];
            const auto idx = static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(p.size())));
            const double saved = p.data()[idx];
            p.data()[idx] = saved + h;
            const double up = loss_and_gradients(net, z, t, v, cond).loss;
            p.data()[idx] = saved - h;
            const double down = loss_and_gradients(net, z, t, v, cond).loss;
            p.data()[idx] = saved;
            const double fd = (up - down) / (2.0 * h);
            const double an = lg.gradients[tensor].data()[idx];
            const double rel = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-6});
            worst = std::max(worst, rel);
        }
    }
    MESSAGE("worst relative gradient error: " << worst);
    CHECK(worst <= 1e-4);
}

TEST_CASE("flatten and assign round-trip") {
    RngStream init(4);
    const auto net = VectorFieldNet::initialized(small_arch(kPointShape, 2), init);
    VectorFieldNet copy(net.architecture());
    copy.assign(net.flatten());
    CHECK(copy == net);
    CHECK_THROWS_AS(copy.assign(std::vector<double>(3)), ConfigError);
}

TEST_CASE("adam with zero gradients leaves parameters unchanged") {
    RngStream init(5);
    auto net = VectorFieldNet::initialized(small_arch(kPointShape), init);
    const auto before = net;
    auto state = make_optimizer_state(net.parameters());
    ParameterSet zero;
    for (const auto& p : net.parameters()) zero.push_back(Eigen::MatrixXd::Zero(p.rows(), p.cols()));
    optimizer_step(state, net, zero);
    CHECK(net == before);
    CHECK(state.step == 1);
}

TEST_CASE("adam descends a quadratic like a scalar reference") {
    ParameterSet w{Eigen::MatrixXd::Constant(1, 1, 1.0)};
    auto state = make_optimizer_state(w, AdamConfig{0.1});

    optimizer_step(state, w, ParameterSet{Eigen::MatrixXd::Constant(1, 1, 2.0 * w[0](0, 0))});
    CHECK(w[0](0, 0) < 1.0);

    // Scalar re-derivation of the update rule.
    double ref = 1.0, m = 0.0, v = 0.0;
    {
        const double g = 2.0;
        m = 0.1 * g;
        v = 0.001 * g * g;
        ref -= 0.1 * (m / 0.1) / (std::sqrt(v / 0.001) + 1e-8);
    }
    for (int step = 2; step <= 500; ++step) {
        optimizer_step(state, w, ParameterSet{Eigen::MatrixXd::Constant(1, 1, 2.0 * w[0](0, 0))});
        const double g = 2.0 * ref;
        m = 0.9 * m + 0.1 * g;
        v = 0.999 * v + 0.001 * g * g;
        ref -= 0.1 * (m / (1.0 - std::pow(0.9, step))) / (std::sqrt(v / (1.0 - std::pow(0.999, step))) + 1e-8);
    }
    CHECK(state.step == 500);
    CHECK(std::abs(w[0](0, 0)) < 1e-3);
    CHECK(std::abs(w[0](0, 0) - ref) < 1e-9);

    ParameterSet wrong{Eigen::MatrixXd::Zero(2, 1)};
    CHECK_THROWS_AS(optimizer_step(state, w, wrong), ConfigError);
}
