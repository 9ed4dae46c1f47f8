#include "hyptrack/combinatorics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hyptrack {

BigInt binomial(std::int64_t n, std::int64_t k) {
    if (n < 0 || k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    BigInt r = 1;
    for (std::int64_t i = 1; i <= k; ++i) {
        r *= n - k + i;
        r /= i;
    }
    return r;
}

BigInt factorial(std::int64_t n) {
    if (n < 0) throw std::invalid_argument("factorial of a negative number");
    BigInt r = 1;
    for (std::int64_t i = 2; i <= n; ++i) r *= i;
    return r;
}

BigInt count_associations(std::int64_t num_objects, std::int64_t num_returns) {
    if (num_objects < 0 || num_returns < 0) throw std::invalid_argument("count_associations: negative count");
    BigInt total = 0;
    // C(m,n) n! is the falling factorial m (m-1) ... (m-n+1).
    BigInt falling = 1;
    for (std::int64_t n = 0; n <= std::min(num_objects, num_returns); ++n) {
        if (n > 0) falling *= num_returns - n + 1;
        total += binomial(num_objects, n) * falling;
    }
    return total;
}

BigInt count_grandchildren(std::int64_t num_objects, std::int64_t num_returns, std::int64_t num_pixels,
                           GrandchildCountOptions options) {
    if (num_objects < 0 || num_returns < 0 || num_pixels < 0)
        throw std::invalid_argument("count_grandchildren: negative count");
    const std::int64_t max_births = options.births ? num_pixels : 0;
    const std::int64_t max_deaths = options.deaths ? num_objects : 0;
    BigInt total = 0;
    for (std::int64_t nb = 0; nb <= max_births; ++nb) {
        const BigInt birth_ways = binomial(num_pixels, nb);
        for (std::int64_t nd = 0; nd <= max_deaths; ++nd) {
            total += birth_ways * binomial(num_objects, nd) *
                     count_associations(num_objects + nb - nd, num_returns);
        }
    }
    return total;
}

BigInt count_grandchildren_as_printed(std::int64_t num_objects, std::int64_t num_returns,
                                      std::int64_t num_pixels) {
    const std::int64_t M = num_objects;
    const std::int64_t N = num_pixels;
    BigInt total = 0;
    // Net gain K: births K + j, deaths j.
    for (std::int64_t K = 0; K <= N; ++K) {
        BigInt a = 0;
        for (std::int64_t j = 0; j <= N; ++j) a += binomial(N, K + j) * binomial(M, j);
        total += a * count_associations(M + K, num_returns);
    }
    // Net loss K: deaths K + j, births j. Lower limit -1 as printed.
    for (std::int64_t K = -1; K <= M; ++K) {
        BigInt a = 0;
        for (std::int64_t j = 0; j <= M - K; ++j) a += binomial(M, K + j) * binomial(N, j);
        if (M - K >= 0) total += a * count_associations(M - K, num_returns);
    }
    return total;
}

std::string to_decimal(const BigInt& v) { return v.str(); }

double to_double(const BigInt& v) { return v.convert_to<double>(); }

double log_factorial(std::int64_t n) {
    if (n < 0) throw std::invalid_argument("log_factorial of a negative number");
    return std::lgamma(static_cast<double>(n) + 1.0);
}

double log_binomial(std::int64_t n, std::int64_t k) {
    if (n < 0 || k < 0 || k > n) return -std::numeric_limits<double>::infinity();
    return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

}  // namespace hyptrack
