#pragma once

#include <string>
#include <string_view>

namespace tcfou {

enum class BernsteinKind { Stable, TemperedStable };

/// Laplace exponent Φ of a driftless, killing-free subordinator with an
/// infinite Lévy measure. Two closed families are supported:
///
///   Stable(α):            Φ(λ) = λ^α
///   TemperedStable(α, μ): Φ(λ) = (λ + μ)^α − μ^α,  ν(ds) = α/Γ(1−α) e^{−μs} s^{−1−α} ds
///
/// Both are regularly varying at infinity with index α ∈ (0, 1).
class BernsteinSpec {
public:
    static BernsteinSpec stable(double alpha);
    static BernsteinSpec tempered(double alpha, double mu);

    /// Parses "stable:<α>" or "tempered:<α>:<μ>".
    static BernsteinSpec parse(std::string_view token);

    /// Inverse of parse(); round-trips exactly.
    std::string token() const;

    BernsteinKind kind() const noexcept { return kind_; }
    double alpha() const noexcept { return alpha_; }
    double mu() const noexcept { return mu_; }
    bool is_stable() const noexcept { return kind_ == BernsteinKind::Stable; }

    friend bool operator==(const BernsteinSpec&, const BernsteinSpec&) = default;

private:
    BernsteinSpec(BernsteinKind kind, double alpha, double mu) : kind_(kind), alpha_(alpha), mu_(mu) {}

    BernsteinKind kind_;
    double alpha_;
    double mu_;
};

/// Φ(λ) for λ > 0.
double phi_eval(const BernsteinSpec& spec, double lambda);

/// Lévy tail ν̄_Φ(t) = ν_Φ(t, ∞) for t > 0.
double levy_tail(const BernsteinSpec& spec, double t);

/// The unique λ > 0 with Φ(λ) = η. Stable: closed form. Tempered: bracketing
/// bisection to relative tolerance 1e-12.
double phi_inverse_real(const BernsteinSpec& spec, double eta);

}  // namespace tcfou
