"""Time-changed fractional Ornstein-Uhlenbeck processes: kernels, simulation,
subordination and Fokker-Planck checks backed by a C++ core."""

from ._tcfou import (
    BernsteinSpec,
    ContractError,
    DomainError,
    NumericError,
    caputo,
    gaussian_density,
    gaussian_fp_oracle,
    genfp_residual,
    inverse_stable_density,
    laplace_identity_residual,
    levy_tail,
    max_principle,
    moment,
    moment_limit,
    phi,
    phi_inverse,
    run_cli,
    sample_fbm,
    sample_fou,
    sample_inverse_subordinator,
    sample_tcfou,
    solve_fp,
    stable_cdf,
    stable_density,
    stationary_variance,
    subordinate,
    uniform_grid,
    variance,
    variance_prime,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
