#include "tcfou/simulate.hpp"

#include <fftw3.h>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <exception>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <thread>

#include "tcfou/errors.hpp"
#include "tcfou/parallel.hpp"
#include "tcfou/text.hpp"

namespace tcfou {

std::string to_string(ProcessTag tag) {
    switch (tag) {
        case ProcessTag::FBM: return "fbm";
        case ProcessTag::FOU: return "fou";
        case ProcessTag::InverseSubordinator: return "inv-sub";
        case ProcessTag::TimeChangedFOU: return "tcfou";
    }
    return "unknown";
}

namespace {

std::uint64_t splitmix(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    std::uint64_t x = seed;
    std::uint64_t h = splitmix(x);
    x = h ^ (stream * 0xd1b54a32d192ed03ULL);
    h = splitmix(x);
    x = h ^ (index * 0x8cb92ba72f3d8dd7ULL);
    state_ = splitmix(x);
}

std::uint64_t Rng::next_u64() { return splitmix(state_); }

double Rng::uniform() {
    // 53 random bits, shifted off zero.
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double a = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

std::vector<double> uniform_grid(double t_max, std::size_t n_steps) {
    if (!(t_max > 0.0) || n_steps == 0) throw ContractError("uniform_grid: need t_max > 0 and n_steps >= 1");
    std::vector<double> g(n_steps + 1);
    for (std::size_t i = 0; i <= n_steps; ++i) g[i] = t_max * static_cast<double>(i) / static_cast<double>(n_steps);
    return g;
}

unsigned worker_count() {
    if (const char* env = std::getenv("TCFOU_THREADS")) {
        const auto n = parse_uint_strict(env, "TCFOU_THREADS");
        if (n == 0) throw ContractError("TCFOU_THREADS must be at least 1");
        return static_cast<unsigned>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

void check_hurst(double h) {
    if (!(h > 0.5 && h < 1.0)) throw ContractError("Hurst index must lie in (1/2, 1), got " + format_double(h));
}

double uniform_step(std::span<const double> grid) {
    if (grid.size() < 2) throw ContractError("time grid needs at least two points");
    if (grid[0] != 0.0) throw ContractError("time grid must start at 0");
    const double dt = (grid.back() - grid.front()) / static_cast<double>(grid.size() - 1);
    if (!(dt > 0.0)) throw ContractError("time grid must be strictly increasing");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (std::abs((grid[i] - grid[i - 1]) - dt) > 1e-9 * dt)
            throw ContractError("fBm sampling requires a uniform time grid");
    return dt;
}

// Circulant embedding of fractional Gaussian noise with unit step:
// sqrt(λ_k / M) for the M = 2n circulant eigenvalues, and an FFTW plan.
struct Circulant {
    std::size_t n = 0;
    std::size_t m = 0;
    std::vector<double> scale;
    fftw_plan plan = nullptr;
    bool usable = true;

    ~Circulant() {
        if (plan) {
            std::lock_guard lock(planner_mutex());
            fftw_destroy_plan(plan);
        }
    }
    static std::mutex& planner_mutex() {
        static std::mutex m;
        return m;
    }
};

double fgn_cov(double hurst, std::size_t k) {
    const double kk = static_cast<double>(k);
    const double e = 2.0 * hurst;
    return 0.5 * (std::pow(kk + 1.0, e) - 2.0 * std::pow(kk, e) + std::pow(std::abs(kk - 1.0), e));
}

std::shared_ptr<const Circulant> circulant_for(double hurst, std::size_t n) {
    static std::mutex cache_mutex;
    static std::map<std::pair<double, std::size_t>, std::shared_ptr<const Circulant>> cache;
    std::lock_guard cache_lock(cache_mutex);
    auto it = cache.find({hurst, n});
    if (it != cache.end()) return it->second;

    auto c = std::make_shared<Circulant>();
    c->n = n;
    c->m = 2 * n;
    const std::size_t m = c->m;
    auto* in = fftw_alloc_complex(m);
    auto* out = fftw_alloc_complex(m);
    {
        std::lock_guard lock(Circulant::planner_mutex());
        c->plan = fftw_plan_dft_1d(static_cast<int>(m), in, out, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    for (std::size_t j = 0; j < m; ++j) {
        in[j][0] = fgn_cov(hurst, j <= n ? j : m - j);
        in[j][1] = 0.0;
    }
    fftw_execute(c->plan);
    c->scale.resize(m);
    double peak = 0.0;
    for (std::size_t k = 0; k < m; ++k) peak = std::max(peak, out[k][0]);
    for (std::size_t k = 0; k < m; ++k) {
        const double lam = out[k][0];
        if (lam < -1e-10 * peak) c->usable = false;
        c->scale[k] = std::sqrt(std::max(lam, 0.0) / static_cast<double>(m));
    }
    fftw_free(in);
    fftw_free(out);
    return cache.emplace(std::make_pair(hurst, n), std::move(c)).first->second;
}

// Per-thread FFT buffers in FFTW's alignment.
struct FftBuffers {
    fftw_complex* in = nullptr;
    fftw_complex* out = nullptr;
    std::size_t size = 0;

    void ensure(std::size_t m) {
        if (m <= size) return;
        release();
        in = fftw_alloc_complex(m);
        out = fftw_alloc_complex(m);
        size = m;
    }
    void release() {
        if (in) fftw_free(in);
        if (out) fftw_free(out);
        in = out = nullptr;
        size = 0;
    }
    ~FftBuffers() { release(); }
};

// fBm on the uniform grid {0, dt, ..., n dt}; out has n + 1 entries.
void fbm_path_circulant(const Circulant& c, double hurst, double dt, Rng& rng, FftBuffers& buf, std::span<double> out) {
    const std::size_t m = c.m;
    buf.ensure(m);
    for (std::size_t k = 0; k < m; ++k) {
        buf.in[k][0] = c.scale[k] * rng.normal();
        buf.in[k][1] = c.scale[k] * rng.normal();
    }
    fftw_execute_dft(c.plan, buf.in, buf.out);
    const double s = std::pow(dt, hurst);
    out[0] = 0.0;
    double acc = 0.0;
    for (std::size_t j = 0; j < c.n; ++j) {
        acc += s * buf.out[j][0];
        out[j + 1] = acc;
    }
}

Eigen::MatrixXd fbm_cholesky_factor(double hurst, std::span<const double> grid) {
    const auto n = static_cast<Eigen::Index>(grid.size() - 1);
    Eigen::MatrixXd cov(n, n);
    const double e = 2.0 * hurst;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            const double t = grid[static_cast<std::size_t>(i) + 1];
            const double s = grid[static_cast<std::size_t>(j) + 1];
            cov(i, j) = 0.5 * (std::pow(t, e) + std::pow(s, e) - std::pow(std::abs(t - s), e));
        }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) throw NumericError("fBm covariance is not positive definite", 0.0, 0.0);
    return llt.matrixL();
}

// Integration by parts on a uniform grid: I_{k+1} = e^{−Δ/θ} I_k + Δ/2 (e^{−Δ/θ} B_k + B_{k+1}).
void fou_from_fbm(std::span<double> path, double theta, double dt) {
    const double decay = std::exp(-dt / theta);
    double integral = 0.0;
    double b_prev = path[0];
    for (std::size_t k = 1; k < path.size(); ++k) {
        const double b = path[k];
        integral = decay * integral + 0.5 * dt * (decay * b_prev + b);
        b_prev = b;
        path[k] = b - integral / theta;
    }
}

PathEnsemble sample_gaussian(double hurst, double theta, bool fou, std::span<const double> grid, std::size_t n_paths,
                             std::uint64_t seed, const FbmOptions& options) {
    check_hurst(hurst);
    if (fou && !(theta > 0.0)) throw ContractError("relaxation time theta must be positive");
    if (n_paths == 0) throw ContractError("n_paths must be positive");
    const double dt = uniform_step(grid);
    PathEnsemble ens;
    ens.time_grid.assign(grid.begin(), grid.end());
    ens.n_paths = n_paths;
    ens.values.assign(n_paths * grid.size(), 0.0);
    ens.seed = seed;
    ens.tag = fou ? ProcessTag::FOU : ProcessTag::FBM;

    const std::size_t n = grid.size() - 1;
    auto circ = circulant_for(hurst, n);
    const bool use_cholesky = options.force_cholesky || !circ->usable;
    ens.cholesky_fallback = use_cholesky;
    Eigen::MatrixXd chol;
    if (use_cholesky) chol = fbm_cholesky_factor(hurst, grid);

    parallel_for(n_paths, [&](std::size_t p) {
        thread_local FftBuffers buf;
        Rng rng(seed, 0, p);
        std::span<double> row(ens.values.data() + p * grid.size(), grid.size());
        if (use_cholesky) {
            Eigen::VectorXd z(static_cast<Eigen::Index>(n));
            for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
            const Eigen::VectorXd b = chol.triangularView<Eigen::Lower>() * z;
            row[0] = 0.0;
            for (std::size_t i = 0; i < n; ++i) row[i + 1] = b(static_cast<Eigen::Index>(i));
        } else {
            fbm_path_circulant(*circ, hurst, dt, rng, buf, row);
        }
        if (fou) fou_from_fbm(row, theta, dt);
    });
    return ens;
}

void check_grid(std::span<const double> grid) {
    if (grid.empty() || grid[0] != 0.0) throw ContractError("time grid must start at 0");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw ContractError("time grid must be strictly increasing");
}

// First-passage lattice values of σ over the (increasing) grid times.
void inverse_path(const BernsteinSpec& spec, std::span<const double> grid, double y_step, Rng& rng,
                  std::span<double> out) {
    double sigma = 0.0;
    std::size_t k = 0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        if (grid[j] == 0.0) {
            out[j] = 0.0;
            continue;
        }
        while (sigma <= grid[j]) {
            sigma += sample_subordinator_increment(spec, y_step, rng);
            ++k;
        }
        out[j] = static_cast<double>(k) * y_step;
    }
}

}  // namespace

PathEnsemble sample_fbm(double hurst, std::span<const double> grid, std::size_t n_paths, std::uint64_t seed,
                        const FbmOptions& options) {
    return sample_gaussian(hurst, 0.0, false, grid, n_paths, seed, options);
}

PathEnsemble sample_fou(double hurst, double theta, std::span<const double> grid, std::size_t n_paths,
                        std::uint64_t seed, const FbmOptions& options) {
    return sample_gaussian(hurst, theta, true, grid, n_paths, seed, options);
}

double sample_subordinator_increment(const BernsteinSpec& spec, double y_step, Rng& rng) {
    const double a = spec.alpha();
    const double scale = std::pow(y_step, 1.0 / a);
    // Kanter's form of the Chambers-Mallows-Stuck sampler for β = 1, α < 1:
    // σ(1) = (A(U)/W)^{(1−α)/α}, U ~ Uniform(0, π), W ~ Exp(1).
    auto draw = [&]() {
        const double phi = std::numbers::pi * rng.uniform();
        const double w = rng.exponential();
        const double log_a = (a / (1.0 - a)) * std::log(std::sin(a * phi)) + std::log(std::sin((1.0 - a) * phi)) -
                             std::log(std::sin(phi)) / (1.0 - a);
        return scale * std::exp((1.0 - a) / a * (log_a - std::log(w)));
    };
    if (spec.is_stable() || spec.mu() == 0.0) return draw();
    // Exponential tilting: accept x with probability e^{−μx}.
    while (true) {
        const double x = draw();
        if (rng.uniform() < std::exp(-spec.mu() * x)) return x;
    }
}

PathEnsemble sample_inverse_subordinator(const BernsteinSpec& spec, std::span<const double> grid,
                                         std::size_t n_paths, std::uint64_t seed, double y_step) {
    check_grid(grid);
    if (!(y_step > 0.0)) throw ContractError("y_step must be positive");
    if (n_paths == 0) throw ContractError("n_paths must be positive");
    PathEnsemble ens;
    ens.time_grid.assign(grid.begin(), grid.end());
    ens.n_paths = n_paths;
    ens.values.assign(n_paths * grid.size(), 0.0);
    ens.seed = seed;
    ens.tag = ProcessTag::InverseSubordinator;
    ens.y_step = y_step;
    parallel_for(n_paths, [&](std::size_t p) {
        Rng rng(seed, 1, p);
        inverse_path(spec, grid, y_step, rng, {ens.values.data() + p * grid.size(), grid.size()});
    });
    return ens;
}

PathEnsemble sample_tcfou(double hurst, double theta, const BernsteinSpec& spec, std::span<const double> grid,
                          std::size_t n_paths, std::uint64_t seed, const TcfouOptions& options) {
    check_hurst(hurst);
    check_grid(grid);
    if (!(theta > 0.0)) throw ContractError("relaxation time theta must be positive");
    if (!(options.y_step > 0.0) || !(options.aux_step > 0.0))
        throw ContractError("y_step and aux_step must be positive");
    if (n_paths == 0) throw ContractError("n_paths must be positive");
    PathEnsemble ens;
    ens.time_grid.assign(grid.begin(), grid.end());
    ens.n_paths = n_paths;
    ens.values.assign(n_paths * grid.size(), 0.0);
    ens.seed = seed;
    ens.tag = ProcessTag::TimeChangedFOU;
    ens.y_step = options.y_step;
    ens.aux_step = options.aux_step;
    if (options.trace) {
        options.trace->e_end.assign(n_paths, 0.0);
        options.trace->b_one.assign(n_paths, 0.0);
    }
    const double h = options.aux_step;

    parallel_for(n_paths, [&](std::size_t p) {
        thread_local FftBuffers buf;
        thread_local std::vector<double> clock, aux;
        clock.resize(grid.size());
        Rng rng_clock(seed, 1, p);
        inverse_path(spec, grid, options.y_step, rng_clock, clock);
        const double e_max = std::max(clock.back(), 1.0);
        // Sizes rounded up to multiples of 64 so a handful of FFT plans serve all paths.
        std::size_t n_aux = static_cast<std::size_t>(std::ceil(e_max / h));
        n_aux = (n_aux + 63) / 64 * 64;
        aux.resize(n_aux + 1);
        Rng rng_noise(seed, 2, p);
        auto circ = circulant_for(hurst, n_aux);
        if (!circ->usable) throw NumericError("circulant embedding failed on the auxiliary grid", 0.0, 0.0);
        fbm_path_circulant(*circ, hurst, h, rng_noise, buf, aux);
        auto interp = [&](double s) {
            const double u = s / h;
            const auto i = std::min(static_cast<std::size_t>(u), n_aux - 1);
            const double f = u - static_cast<double>(i);
            return aux[i] * (1.0 - f) + aux[i + 1] * f;
        };
        if (options.trace) {
            options.trace->b_one[p] = interp(1.0);
            options.trace->e_end[p] = clock.back();
        }
        fou_from_fbm(aux, theta, h);
        double* row = ens.values.data() + p * grid.size();
        for (std::size_t j = 0; j < grid.size(); ++j) row[j] = interp(clock[j]);
    });
    return ens;
}

}  // namespace tcfou
