#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tcfou/bernstein.hpp"

namespace tcfou {

enum class ProcessTag { FBM, FOU, InverseSubordinator, TimeChangedFOU };

std::string to_string(ProcessTag tag);

/// Trajectories on a shared grid, stored row-major (one row per path).
struct PathEnsemble {
    std::vector<double> time_grid;
    std::size_t n_paths = 0;
    std::vector<double> values;
    std::uint64_t seed = 0;
    ProcessTag tag = ProcessTag::FBM;
    double y_step = 0.0;             ///< lattice step of the inverse subordinator (its bias bound)
    double aux_step = 0.0;           ///< auxiliary fOU grid step for the composed process
    bool cholesky_fallback = false;  ///< circulant embedding was not usable

    std::size_t n_times() const noexcept { return time_grid.size(); }
    double at(std::size_t path, std::size_t j) const { return values[path * time_grid.size() + j]; }
    double& at(std::size_t path, std::size_t j) { return values[path * time_grid.size() + j]; }
    std::span<const double> path(std::size_t p) const {
        return {values.data() + p * time_grid.size(), time_grid.size()};
    }
};

/// Counter-based generator: the stream is a pure function of
/// (seed, stream, index), so path i does not depend on scheduling.
class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

    std::uint64_t next_u64();
    /// Uniform on the open interval (0, 1).
    double uniform();
    double normal();
    double exponential() { return -std::log(uniform()); }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// n_steps + 1 equally spaced points on [0, t_max].
std::vector<double> uniform_grid(double t_max, std::size_t n_steps);

/// Worker threads for path-parallel loops: TCFOU_THREADS if set, otherwise
/// the hardware concurrency.
unsigned worker_count();

struct FbmOptions {
    bool force_cholesky = false;  ///< bypass the circulant embedding (testing aid)
};

PathEnsemble sample_fbm(double hurst, std::span<const double> grid, std::size_t n_paths, std::uint64_t seed,
                        const FbmOptions& options = {});

/// U_H(t) = B(t) − (1/θ) ∫_0^t e^{−(t−s)/θ} B(s) ds, trapezoid rule on the grid.
PathEnsemble sample_fou(double hurst, double theta, std::span<const double> grid, std::size_t n_paths,
                        std::uint64_t seed, const FbmOptions& options = {});

/// A one-sided stable (or exponentially tempered) increment σ(y_step).
double sample_subordinator_increment(const BernsteinSpec& spec, double y_step, Rng& rng);

/// First-passage lattice value of σ over each grid time; over-estimates
/// E(t) by at most y_step.
PathEnsemble sample_inverse_subordinator(const BernsteinSpec& spec, std::span<const double> grid,
                                         std::size_t n_paths, std::uint64_t seed, double y_step);

/// Optional record of per-path E(t_end) and the driving B^H(1), used to
/// test independence of the two streams.
struct TcfouTrace {
    std::vector<double> e_end;
    std::vector<double> b_one;
};

struct TcfouOptions {
    double y_step = 1e-3;
    double aux_step = 2e-3;
    TcfouTrace* trace = nullptr;
};

/// U_H(E(t)) with E and B^H drawn from independent streams of the seed. The
/// fOU is generated per path on a uniform grid of step aux_step covering
/// [0, max(E(t_end), 1)] and linearly interpolated.
PathEnsemble sample_tcfou(double hurst, double theta, const BernsteinSpec& spec, std::span<const double> grid,
                          std::size_t n_paths, std::uint64_t seed, const TcfouOptions& options = {});

}  // namespace tcfou
