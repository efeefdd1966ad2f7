#include "rmstop/rng.hpp"

#include "rmstop/special_functions.hpp"

#include <cmath>
#include <stdexcept>

namespace rmstop {

double Rng::normal() { return sf::norm_quantile(uniform_open()); }

long Rng::poisson(double lambda) {
    if (!(lambda >= 0.0)) throw std::domain_error("Rng::poisson: lambda must be nonnegative");
    if (lambda == 0.0) return 0;
    const double u = uniform();
    long k = 0;
    double term = std::exp(-lambda);
    double cdf = term;
    // Inversion; loop length ~ lambda + O(sqrt(lambda)).
    while (u >= cdf) {
        ++k;
        term *= lambda / static_cast<double>(k);
        cdf += term;
        if (k > 10000000) throw std::runtime_error("Rng::poisson: inversion overflow");
    }
    return k;
}

} // namespace rmstop
