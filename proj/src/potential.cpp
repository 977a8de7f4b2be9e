#include "boxres/potential.hpp"

#include <cmath>
#include <string>

#include "boxres/error.hpp"

namespace boxres {

namespace {

void require_positive_radius(double r) {
    if (!(r > 0.0) || !std::isfinite(r)) {
        throw DomainError("potential evaluated at non-positive radius r = " + std::to_string(r));
    }
}

} // namespace

void validate(const PotentialSpec& spec) {
    if (spec.l < 0) {
        throw DomainError("orbital angular momentum must be non-negative, got l = " +
                          std::to_string(spec.l));
    }
    if (!std::isfinite(spec.v0) || !std::isfinite(spec.z)) {
        throw DomainError("potential parameters must be finite");
    }
}

double eval_finite_range(const PotentialSpec& spec, double r) {
    require_positive_radius(r);
    return spec.v0 * r * r * std::exp(-r);
}

double eval_total(const PotentialSpec& spec, double r) {
    return eval_finite_range(spec, r) + spec.z / r;
}

double eval_effective(const PotentialSpec& spec, double r) {
    const double ll = static_cast<double>(spec.l) * (spec.l + 1);
    return eval_total(spec, r) + ll / (2.0 * r * r);
}

} // namespace boxres
