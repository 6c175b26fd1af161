#pragma once

#include <cstdint>
#include <random>

namespace hawkesdiv {

/**
 * Deterministic random stream.
 *
 * A stream is identified by a (seed, stream_id) pair: identical pairs yield
 * bit-identical draw sequences, distinct stream_ids yield statistically
 * independent streams.  Batch work derives one stream per trajectory from
 * (master seed, trajectory index) so results do not depend on scheduling.
 *
 * The generator is std::mt19937_64 seeded through std::seed_seq (both fully
 * specified by the standard); the variate transforms below are hand-rolled so
 * that draws are reproducible across standard-library implementations.
 */
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

    /// Uniform draw on the open interval (0, 1): 53-bit resolution, never 0 or 1.
    double uniform();

    /// Exponential draw with the given rate (mean 1/rate); strictly positive.
    double exponential(double rate);

    /// Standard normal draw (Box-Muller; the paired variate is cached).
    double normal();

    /// Raw 64-bit output of the underlying generator.
    std::uint64_t next_u64() { return gen_(); }

private:
    std::mt19937_64 gen_;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

}  // namespace hawkesdiv
