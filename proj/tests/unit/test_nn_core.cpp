#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "helpers.hpp"
#include "sciu/errors.hpp"
#include "sciu/nn_core.hpp"

using namespace sciu;

TEST_SUITE("nn_core") {

TEST_CASE("linear_forward examples") {
    LinearLayer id(2, 2);
    id.weight = Matrix::identity(2);
    CHECK(linear_forward(id, Vector{3.0, -1.0}) == Vector{3.0, -1.0});

    LinearLayer zero(2, 2);
    zero.bias = {1.0, 2.0};
    CHECK(linear_forward(zero, Vector{7.5, -4.0}) == Vector{1.0, 2.0});

    LinearLayer m(2, 2);
    m.weight = Matrix(2, 2, std::vector<double>{1, 2, 3, 4});
    CHECK(linear_forward(m, Vector{1.0, 1.0}) == Vector{3.0, 7.0});
}

TEST_CASE("linear_forward rejects a dimension mismatch") {
    LinearLayer m(3, 2);
    CHECK_THROWS_AS(linear_forward(m, Vector{1.0, 2.0}), ConfigError);
}

TEST_CASE("linear_backward_input is the transpose product") {
    LinearLayer m(2, 3);
    m.weight = Matrix(3, 2, std::vector<double>{1, 2, 3, 4, 5, 6});
    // Wᵀ·(1, 0, -1) = (1 - 5, 2 - 6)
    CHECK(linear_backward_input(m, Vector{1.0, 0.0, -1.0}) == Vector{-4.0, -4.0});
}

TEST_CASE("relu") {
    CHECK(relu(Vector{-1.0, 0.0, 2.0}) == Vector{0.0, 0.0, 2.0});
    CHECK(relu(Vector{-3.0, -0.5}) == Vector{0.0, 0.0});
    CHECK(relu(Vector{0.25, 9.0}) == Vector{0.25, 9.0});
}

TEST_CASE("sigmoid") {
    CHECK(sigmoid(0.0) == 0.5);
    CHECK(sigmoid(40.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(sigmoid(1.0) == doctest::Approx(0.7310585786).epsilon(1e-10));
    // saturates without leaving (0,1) or producing NaN
    for (double x : {-800.0, -40.0, -1.0, 1.0, 35.0}) {
        const double s = sigmoid(x);
        CHECK(std::isfinite(s));
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
    }
    CHECK(sigmoid(-30.0) > 0.0);
    CHECK(sigmoid(30.0) < 1.0);
}

TEST_CASE("softmax examples") {
    const auto u = softmax(Vector{0.0, 0.0, 0.0});
    for (double p : u) CHECK(p == doctest::Approx(1.0 / 3.0));

    const auto a = softmax(Vector{5.0, 5.0 + 1.7});
    const auto b = softmax(Vector{0.0, 1.7});
    CHECK(a[0] == doctest::Approx(b[0]).epsilon(1e-14));
    CHECK(a[1] == doctest::Approx(b[1]).epsilon(1e-14));

    const auto c = softmax(Vector{1.0, 2.0});
    CHECK(c[0] == doctest::Approx(0.26894).epsilon(1e-5));
    CHECK(c[1] == doctest::Approx(0.73106).epsilon(1e-5));
}

TEST_CASE("softmax property: distribution and shift invariance") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> shift(-500.0, 500.0);
    for (int trial = 0; trial < 500; ++trial) {
        auto logits = testing::random_vector(rng, 1 + trial % 9, 1.0 + trial % 50);
        const auto p = softmax(logits);
        double sum = 0.0;
        for (double v : p) {
            CHECK(v >= 0.0);
            sum += v;
        }
        CHECK(std::abs(sum - 1.0) <= 1e-9);

        const double k = shift(rng);
        for (auto& v : logits) v += k;
        const auto q = softmax(logits);
        for (std::size_t i = 0; i < p.size(); ++i) CHECK(std::abs(p[i] - q[i]) <= 1e-9);
    }
    // huge logits stay finite
    const auto big = softmax(Vector{1e300, -1e300, 0.0});
    CHECK(big[0] == 1.0);
}

TEST_CASE("cross_entropy") {
    CHECK(cross_entropy(Vector{0.0, 1.0}, 1) == 0.0);
    CHECK(cross_entropy(Vector(5, 0.2), 3) == doctest::Approx(std::log(5.0)));
    CHECK(cross_entropy(Vector{0.5, 0.5}, 0) == doctest::Approx(0.693147).epsilon(1e-6));
    // clamp
    CHECK(cross_entropy(Vector{1.0, 0.0}, 1) == doctest::Approx(-std::log(kLogClamp)));

    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) {
        const auto p = softmax(testing::random_vector(rng, 4, 3.0));
        CHECK(cross_entropy(p, i % 4) >= 0.0);
    }
}

TEST_CASE("argmax takes the lowest index on ties") {
    CHECK(argmax(Vector{0.2, 0.5, 0.5}) == 1);
    CHECK(argmax(Vector{0.7, 0.1, 0.7}) == 0);
    CHECK(argmax(Vector{-3.0}) == 0);
}

TEST_CASE("sgd_momentum_step examples") {
    SUBCASE("momentum 0 is plain sgd") {
        Vector p{1.0, -2.0}, v{0.0, 0.0};
        sgd_momentum_step(p, Vector{0.5, -1.0}, v, 0.1, 0.0);
        CHECK(p[0] == doctest::Approx(0.95));
        CHECK(p[1] == doctest::Approx(-1.9));
    }
    SUBCASE("zero gradient, zero velocity") {
        Vector p{1.0, 2.0}, v{0.0, 0.0};
        sgd_momentum_step(p, Vector{0.0, 0.0}, v, 0.5, 0.9);
        CHECK(p == Vector{1.0, 2.0});
    }
    SUBCASE("two steps with momentum 0.9 move by g + 1.9g") {
        Vector p{0.0}, v{0.0};
        const Vector g{2.0};
        sgd_momentum_step(p, g, v, 1.0, 0.9);
        sgd_momentum_step(p, g, v, 1.0, 0.9);
        CHECK(p[0] == doctest::Approx(-(2.0 + 1.9 * 2.0)));
        CHECK(v[0] == doctest::Approx(3.8));
    }
    SUBCASE("shape mismatch") {
        Vector p{0.0, 1.0}, v{0.0};
        CHECK_THROWS_AS(sgd_momentum_step(p, Vector{1.0, 1.0}, v, 0.1, 0.9), ConfigError);
    }
    SUBCASE("bad momentum") {
        Vector p{0.0}, v{0.0};
        CHECK_THROWS_AS(sgd_momentum_step(p, Vector{1.0}, v, 0.1, 1.0), ConfigError);
        CHECK_THROWS_AS(sgd_momentum_step(p, Vector{1.0}, v, -0.1, 0.5), ConfigError);
    }
}

TEST_CASE("finite_difference_gradient") {
    const auto quad = [](std::span<const double> x) { return 0.5 * x[0] * x[0]; };
    const Vector x{3.0};
    CHECK(finite_difference_gradient(quad, x)[0] == doctest::Approx(3.0).epsilon(1e-6));

    const auto constant = [](std::span<const double>) { return 4.2; };
    for (double g : finite_difference_gradient(constant, Vector{1.0, -2.0, 0.5})) CHECK(g == 0.0);

    // separable cubic: d/dx_i Σ x³ = 3x²
    const auto cubic = [](std::span<const double> v) {
        double s = 0.0;
        for (double a : v) s += a * a * a;
        return s;
    };
    const Vector y{0.5, -1.5, 2.0};
    const auto g = finite_difference_gradient(cubic, y);
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(g[i] == doctest::Approx(3 * y[i] * y[i]).epsilon(1e-8));
}

TEST_CASE("relative_error and all_finite") {
    CHECK(relative_error(1.0, 1.0) == 0.0);
    CHECK(relative_error(2.0, 1.0) == doctest::Approx(0.5));
    CHECK(relative_error(0.0, 1e-12) < 1e-3);  // floor keeps tiny values quiet
    CHECK(all_finite(Vector{1.0, -2.0}));
    CHECK_FALSE(all_finite(Vector{1.0, std::nan("")}));
    CHECK_FALSE(all_finite(Vector{INFINITY}));
}

}  // TEST_SUITE
