#include "hawkesdiv/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace hawkesdiv {

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) {
    std::seed_seq seq{
        static_cast<std::uint32_t>(seed),
        static_cast<std::uint32_t>(seed >> 32),
        static_cast<std::uint32_t>(stream_id),
        static_cast<std::uint32_t>(stream_id >> 32),
    };
    gen_.seed(seq);
}

double RngStream::uniform() {
    // (x + 0.5) / 2^53 with x in [0, 2^53): open interval, 53-bit mantissa.
    const std::uint64_t x = gen_() >> 11;
    return std::ldexp(static_cast<double>(x) + 0.5, -53);
}

double RngStream::exponential(double rate) {
    if (!(rate > 0.0)) throw std::invalid_argument("RngStream::exponential: rate must be > 0");
    return -std::log(uniform()) / rate;
}

double RngStream::normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double theta = 6.283185307179586476925287 * uniform();
    cached_normal_ = r * std::sin(theta);
    has_cached_normal_ = true;
    return r * std::cos(theta);
}

}  // namespace hawkesdiv
