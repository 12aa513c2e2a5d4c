#pragma once

#include <cstddef>
#include <vector>

namespace pslab {

struct Interval {
    double lo = 0, hi = 0;
    double half_width() const { return 0.5 * (hi - lo); }
};

// Wilson score interval for k successes in n trials.
Interval wilson(std::size_t k, std::size_t n, double z = 1.959963984540054);

double logsumexp(const std::vector<double>& xs);
// log(exp(a) + exp(b)) with -inf handled
double log_add(double a, double b);

double mean(const std::vector<double>& xs);
double variance(const std::vector<double>& xs);  // unbiased

}  // namespace pslab
