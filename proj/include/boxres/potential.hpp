#pragma once

// Central potential V(r) = v0 r^2 exp(-r) + z / r plus the centrifugal barrier.
// All quantities are in atomic units (hbar = m = e = 1).

namespace boxres {

struct PotentialSpec {
    double v0 = 7.5;
    double z = -1.0; ///< Coulomb coefficient; the potential contains +z/r
    int l = 0;
};

/// Throws DomainError when l < 0 or a parameter is not finite.
void validate(const PotentialSpec& spec);

/// v0 r^2 exp(-r). Throws DomainError for r <= 0.
double eval_finite_range(const PotentialSpec& spec, double r);

/// eval_finite_range + z / r.
double eval_total(const PotentialSpec& spec, double r);

/// eval_total + l(l+1) / (2 r^2).
double eval_effective(const PotentialSpec& spec, double r);

} // namespace boxres
