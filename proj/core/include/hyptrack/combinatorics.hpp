#pragma once

// Exact hypothesis counting. All counts use arbitrary-precision integers:
// grandchild counts for a few dozen objects overflow 64 bits.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>

namespace hyptrack {

using BigInt = boost::multiprecision::cpp_int;

[[nodiscard]] BigInt binomial(std::int64_t n, std::int64_t k);  ///< 0 outside 0 <= k <= n
[[nodiscard]] BigInt factorial(std::int64_t n);

/// Number of data-association children of an M-object hypothesis given m
/// returns: sum_{n=0}^{min(m,M)} C(M,n) C(m,n) n!.
[[nodiscard]] BigInt count_associations(std::int64_t num_objects, std::int64_t num_returns);

/// Which birth/death branches are possible when counting grandchildren.
struct GrandchildCountOptions {
    bool births = true;  ///< false pins N_b = 0
    bool deaths = true;  ///< false pins N_d = 0
};

/// Grandchildren (birth/death instance x data association) of an M-object
/// hypothesis with m returns and N birth pixels, by direct summation:
/// sum_{Nb<=N} sum_{Nd<=M} C(N,Nb) C(M,Nd) count_associations(M+Nb-Nd, m).
[[nodiscard]] BigInt count_grandchildren(std::int64_t num_objects, std::int64_t num_returns,
                                         std::int64_t num_pixels,
                                         GrandchildCountOptions options = {});

/// Two-sum closed form: net births K = 0..N with weights
/// sum_j C(N,K+j) C(M,j), plus net losses K = -1..M with weights
/// sum_j C(M,K+j) C(N,j). Starting the loss sum at K = -1 re-counts net
/// changes of +1 and 0, so this overshoots count_grandchildren whenever those
/// terms are nonzero. Kept only for the discrepancy report.
[[nodiscard]] BigInt count_grandchildren_as_printed(std::int64_t num_objects,
                                                    std::int64_t num_returns,
                                                    std::int64_t num_pixels);

[[nodiscard]] std::string to_decimal(const BigInt& v);
[[nodiscard]] double to_double(const BigInt& v);

/// log C(n, k) and log n! in double precision (lgamma based).
[[nodiscard]] double log_binomial(std::int64_t n, std::int64_t k);
[[nodiscard]] double log_factorial(std::int64_t n);

}  // namespace hyptrack
