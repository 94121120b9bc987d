#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "tcfou/errors.hpp"
#include "tcfou/fou_stats.hpp"
#include "tcfou/simulate.hpp"

using namespace tcfou;

namespace {

struct Moments {
    double mean = 0.0;
    double var = 0.0;
    double se_var = 0.0;  // standard error of the second moment
};

Moments column_moments(const PathEnsemble& e, std::size_t j) {
    double s1 = 0.0, s2 = 0.0, s4 = 0.0;
    for (std::size_t p = 0; p < e.n_paths; ++p) {
        const double x = e.at(p, j);
        s1 += x;
        s2 += x * x;
        s4 += x * x * x * x;
    }
    const double n = static_cast<double>(e.n_paths);
    Moments m;
    m.mean = s1 / n;
    m.var = s2 / n;
    m.se_var = std::sqrt((s4 / n - m.var * m.var) / n);
    return m;
}

}  // namespace

TEST_CASE("rng streams are reproducible and distinct") {
    Rng a(7, 0, 3), b(7, 0, 3), c(7, 1, 3), d(7, 0, 4);
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != c.next_u64());
    CHECK(x != d.next_u64());
    Rng u(1, 0, 0);
    for (int i = 0; i < 10000; ++i) {
        const double v = u.uniform();
        CHECK((v > 0.0 && v < 1.0));
    }
}

TEST_CASE("uniform grid") {
    const auto g = uniform_grid(2.0, 4);
    REQUIRE(g.size() == 5);
    CHECK(g[0] == 0.0);
    CHECK(g[4] == 2.0);
    CHECK_THROWS_AS(uniform_grid(0.0, 4), ContractError);
}

TEST_CASE("fBm has variance t^{2H}") {
    const auto grid = uniform_grid(2.0, 64);
    const auto e = sample_fbm(0.7, grid, 20000, 11);
    CHECK_FALSE(e.cholesky_fallback);
    for (std::size_t j : {16u, 32u, 64u}) {
        const auto m = column_moments(e, j);
        CHECK(std::abs(m.var - std::pow(grid[j], 1.4)) < 5 * m.se_var);
        CHECK(std::abs(m.mean) < 5 * std::sqrt(m.var / 20000));
    }
}

TEST_CASE("circulant and Cholesky samplers agree in law") {
    const auto grid = uniform_grid(1.0, 32);
    const auto a = sample_fbm(0.8, grid, 20000, 5);
    const auto b = sample_fbm(0.8, grid, 20000, 5, {.force_cholesky = true});
    CHECK(b.cholesky_fallback);
    // Increment covariance between the first and last step.
    auto cov = [&](const PathEnsemble& e) {
        double s = 0.0;
        for (std::size_t p = 0; p < e.n_paths; ++p) s += e.at(p, 1) * (e.at(p, 32) - e.at(p, 31));
        return s / static_cast<double>(e.n_paths);
    };
    const double dt = 1.0 / 32;
    const double exact = 0.5 * std::pow(dt, 1.6) * (std::pow(32.0, 1.6) - 2 * std::pow(31.0, 1.6) + std::pow(30.0, 1.6));
    const double se = std::pow(dt, 1.6) / std::sqrt(20000.0);
    CHECK(std::abs(cov(a) - exact) < 5 * se);
    CHECK(std::abs(cov(b) - exact) < 5 * se);
    for (std::size_t j : {8u, 32u}) CHECK(std::abs(column_moments(a, j).var - column_moments(b, j).var) <
                                        5 * (column_moments(a, j).se_var + column_moments(b, j).se_var));
}

TEST_CASE("fOU variance follows V") {
    const auto grid = uniform_grid(3.0, 600);
    const auto e = sample_fou(0.75, 1.0, grid, 20000, 3);
    for (std::size_t j : {100u, 300u, 600u}) {
        const auto m = column_moments(e, j);
        CHECK(std::abs(m.var - variance_v2(0.75, 1.0, grid[j])) < 5 * m.se_var + 5e-3);
    }
}

TEST_CASE("inverse subordinator is monotone with the right mean") {
    const auto spec = BernsteinSpec::stable(0.5);
    const auto grid = uniform_grid(2.0, 20);
    const auto e = sample_inverse_subordinator(spec, grid, 20000, 9, 1e-3);
    for (std::size_t p = 0; p < e.n_paths; ++p)
        for (std::size_t j = 1; j < grid.size(); ++j) REQUIRE(e.at(p, j) >= e.at(p, j - 1));
    // E[E(t)] = t^α / Γ(1+α), lattice bias at most y_step.
    for (std::size_t j : {5u, 20u}) {
        double s = 0.0, s2 = 0.0;
        for (std::size_t p = 0; p < e.n_paths; ++p) {
            s += e.at(p, j);
            s2 += e.at(p, j) * e.at(p, j);
        }
        const double n = static_cast<double>(e.n_paths);
        const double mean = s / n;
        const double se = std::sqrt((s2 / n - mean * mean) / n);
        CHECK(std::abs(mean - std::sqrt(grid[j]) / std::tgamma(1.5)) < 5 * se + 1e-3);
    }
}

TEST_CASE("tempered inverse subordinator mean") {
    // E[E(t)] has Laplace transform 1/(λ Φ(λ)); at large t it grows like t/Φ'(0).
    const auto spec = BernsteinSpec::tempered(0.5, 1.0);
    const auto grid = uniform_grid(40.0, 4);
    const auto e = sample_inverse_subordinator(spec, grid, 4000, 2, 1e-2);
    double s = 0.0;
    for (std::size_t p = 0; p < e.n_paths; ++p) s += e.at(p, 4) - e.at(p, 3);
    // Increment over [30, 40] ≈ 10 / Φ'(0) with Φ'(0) = α μ^{α−1} = 1/2.
    CHECK(s / 4000.0 == doctest::Approx(20.0).epsilon(0.03));
}

TEST_CASE("time-changed fOU draws independent streams") {
    const auto spec = BernsteinSpec::stable(0.5);
    const auto grid = uniform_grid(2.0, 10);
    TcfouTrace trace;
    const auto e = sample_tcfou(0.75, 1.0, spec, grid, 20000, 17, {.trace = &trace});
    REQUIRE(trace.e_end.size() == 20000);
    double se = 0, sb = 0, see = 0, sbb = 0, seb = 0;
    for (std::size_t p = 0; p < 20000; ++p) {
        const double x = trace.e_end[p], y = trace.b_one[p];
        se += x;
        sb += y;
        see += x * x;
        sbb += y * y;
        seb += x * y;
    }
    const double n = 20000;
    const double corr = (seb / n - se / n * sb / n) /
                        std::sqrt((see / n - se * se / n / n) * (sbb / n - sb * sb / n / n));
    CHECK(std::abs(corr) < 4.0 / std::sqrt(n));
    CHECK(e.at(0, 0) == 0.0);
}

TEST_CASE("ensembles do not depend on the thread count") {
    const auto spec = BernsteinSpec::stable(0.6);
    const auto grid = uniform_grid(1.0, 50);
    setenv("TCFOU_THREADS", "1", 1);
    const auto a = sample_tcfou(0.7, 2.0, spec, grid, 64, 99);
    setenv("TCFOU_THREADS", "3", 1);
    const auto b = sample_tcfou(0.7, 2.0, spec, grid, 64, 99);
    unsetenv("TCFOU_THREADS");
    CHECK(a.values == b.values);
    const auto c = sample_tcfou(0.7, 2.0, spec, grid, 64, 100);
    CHECK(a.values != c.values);
}

TEST_CASE("sampler contracts") {
    const auto grid = uniform_grid(1.0, 10);
    CHECK_THROWS_AS(sample_fbm(0.5, grid, 10, 1), ContractError);
    CHECK_THROWS_AS(sample_fbm(1.0, grid, 10, 1), ContractError);
    CHECK_THROWS_AS(sample_fou(0.7, 0.0, grid, 10, 1), ContractError);
    CHECK_THROWS_AS(sample_fbm(0.7, std::vector<double>{0.0, 0.1, 0.3}, 10, 1), ContractError);
    CHECK_THROWS_AS(sample_inverse_subordinator(BernsteinSpec::stable(0.5), std::vector<double>{0.1, 0.2}, 10, 1, 1e-3),
                    ContractError);
    setenv("TCFOU_THREADS", "0", 1);
    CHECK_THROWS_AS(worker_count(), ContractError);
    unsetenv("TCFOU_THREADS");
}
