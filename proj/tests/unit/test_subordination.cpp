#include <doctest.h>

#include <cmath>

#include "tcfou/errors.hpp"
#include "tcfou/fou_stats.hpp"
#include "tcfou/simulate.hpp"
#include "tcfou/subordination.hpp"

using namespace tcfou;

namespace {

std::vector<double> fine_grid(double t_end, std::size_t n) { return uniform_grid(t_end, n); }

TimeGridFunction decaying_exp() {
    return TimeGridFunction::sample([](double s) { return std::exp(-s); }, [](double s) { return -std::exp(-s); },
                                    fine_grid(40.0, 40000), Tail::constant(0.0, 1e-15));
}

}  // namespace

TEST_CASE("time grid function interpolation and tails") {
    const TimeGridFunction f({0.0, 1.0, 2.0}, {0.0, 2.0, 3.0}, Tail::constant(3.0));
    CHECK(f(0.5) == doctest::Approx(1.0));
    CHECK(f(10.0) == 3.0);
    CHECK(f.integral(0.0, 3.0) == doctest::Approx(1.0 + 2.5 + 3.0));
    CHECK(f.sup_norm() == 3.0);
    const TimeGridFunction g({0.0, 1.0}, {0.0, 1.0}, Tail::power(1.0));
    CHECK(g(4.0) == doctest::Approx(4.0));
    CHECK(std::isinf(g.sup_norm()));
    const TimeGridFunction h({0.0, 1.0}, {0.0, 1.0}, Tail::forbidden());
    CHECK_THROWS_AS(h(1.5), DomainError);
    CHECK_THROWS_AS(h(-0.1), DomainError);
    CHECK_THROWS_AS(h.derivative(0.5), ContractError);
    CHECK_THROWS_AS(TimeGridFunction({0.0, 1.0}, {0.0, 1.0}, Tail::constant(2.0)), ContractError);
    CHECK_THROWS_AS(TimeGridFunction({0.1, 1.0}, {0.0, 1.0}, Tail::forbidden()), ContractError);
    CHECK_THROWS_AS(TimeGridFunction({0.0, 0.0}, {0.0, 1.0}, Tail::forbidden()), ContractError);
}

TEST_CASE("subordinating a constant") {
    const TimeGridFunction one({0.0, 1.0}, {1.0, 1.0}, Tail::constant(1.0));
    for (double a : {0.3, 0.5, 0.8})
        for (double t : {0.5, 1.0, 2.0}) CHECK(std::abs(subordinate(one, BernsteinSpec::stable(a), t) - 1.0) < 1e-9);
}

TEST_CASE("subordinating the identity gives the mean of E(t)") {
    const TimeGridFunction id({0.0, 1.0}, {0.0, 1.0}, Tail::power(1.0));
    for (double a : {0.3, 0.5, 0.8})
        for (double t : {0.5, 1.0, 2.0})
            CHECK(subordinate(id, BernsteinSpec::stable(a), t) ==
                  doctest::Approx(std::pow(t, a) / std::tgamma(1 + a)).epsilon(1e-8));
}

TEST_CASE("subordinating e^{-s} at index 1/2") {
    const auto v = decaying_exp();
    const auto spec = BernsteinSpec::stable(0.5);
    for (double t : {0.5, 1.0, 2.0}) {
        const double exact = std::exp(t) * std::erfc(std::sqrt(t));
        CHECK(std::abs(subordinate(v, spec, t) - exact) < 1e-7);
        CHECK(std::abs(subordinate_g_form(v, spec, t) - subordinate_f_form(v, spec, t)) < 1e-7);
    }
    CHECK(subordinate(v, spec, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("derivative formula matches finite differences") {
    const auto v = decaying_exp();
    for (double a : {0.3, 0.5, 0.8}) {
        const auto spec = BernsteinSpec::stable(a);
        for (double t : {0.5, 1.0, 2.0}) {
            const double h = 1e-3;
            const double fd = (subordinate(v, spec, t + h) - subordinate(v, spec, t - h)) / (2 * h);
            CHECK(std::abs(subordinate_derivative(v, a, t) - fd) < 1e-5);
        }
    }
    const TimeGridFunction no_deriv({0.0, 1.0}, {1.0, 1.0}, Tail::constant(1.0));
    CHECK_THROWS_AS(subordinate_derivative(no_deriv, 0.5, 1.0), ContractError);
}

TEST_CASE("subordination is positive and monotone in v") {
    const auto spec = BernsteinSpec::stable(0.6);
    const auto grid = fine_grid(30.0, 3000);
    const auto small = TimeGridFunction::sample([](double s) { return 0.5 / (1 + s * s); }, grid, Tail::constant(0.0, 1e-3));
    const auto large = TimeGridFunction::sample([](double s) { return 1.0 / (1 + s * s); }, grid, Tail::constant(0.0, 2e-3));
    for (double t : {0.1, 1.0, 3.0}) {
        CHECK(subordinate(small, spec, t) > 0.0);
        CHECK(subordinate(small, spec, t) < subordinate(large, spec, t));
    }
}

TEST_CASE("Laplace subordination identity") {
    const auto v = decaying_exp();
    for (double a : {0.3, 0.5, 0.8})
        for (double lam : {0.5, 1.0, 4.0}) CHECK(laplace_subordination_residual(v, BernsteinSpec::stable(a), lam) < 1e-6);
}

TEST_CASE("weighted subordination identity") {
    const auto v = decaying_exp();
    const auto spec = BernsteinSpec::stable(0.5);
    for (double lam : {0.5, 2.0}) CHECK(weighted_laplace_residual(v, spec, 0.75, 1.0, lam) < 1e-6);
    // S_{Φ,H} of a constant is S_Φ V'.
    const TimeGridFunction one({0.0, 1.0}, {1.0, 1.0}, Tail::constant(1.0));
    const double w = weighted_subordinate(one, spec, 0.75, 1.0, 1.0);
    const double direct = subordinate_bounded([](double s) { return s > 0 ? variance_v2_prime(0.75, 1.0, s) : 0.0; },
                                              0.0, spec, 1.0);
    CHECK(w == doctest::Approx(direct).epsilon(1e-6));
}

TEST_CASE("Laplace transforms") {
    const auto v = decaying_exp();
    // Linear interpolation on step 1e-3 is accurate to about h²/24.
    CHECK(laplace_transform(v, 1.0) == doctest::Approx(0.5).epsilon(1e-7));
    const TimeGridFunction one({0.0, 1.0}, {1.0, 1.0}, Tail::constant(1.0));
    CHECK(laplace_transform(one, 2.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS(laplace_transform(one, 0.0), DomainError);
}

TEST_CASE("empirical subordination agrees with quadrature") {
    const auto spec = BernsteinSpec::stable(0.5);
    const auto grid = uniform_grid(2.0, 4);
    const auto paths = sample_inverse_subordinator(spec, grid, 20000, 4, 1e-3);
    const auto v = decaying_exp();
    for (std::size_t j : {2u, 4u}) {
        const auto est = subordinate_empirical(v, paths, j);
        const double exact = subordinate(v, spec, grid[j]);
        CHECK(std::abs(est.mean - exact) < 4 * est.std_error + 1e-3);
    }
    CHECK_THROWS_AS(subordinate_empirical(v, paths, 5), ContractError);
}

TEST_CASE("tempered specs are rejected by the density path") {
    const TimeGridFunction one({0.0, 1.0}, {1.0, 1.0}, Tail::constant(1.0));
    CHECK_THROWS_AS(subordinate(one, BernsteinSpec::tempered(0.5, 1.0), 1.0), ContractError);
}
