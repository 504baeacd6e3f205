#pragma once

#include <cmath>
#include <cstdint>

namespace biplink {

namespace rngdetail {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl64(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace rngdetail

// xoshiro256++ stream keyed by (seed, stream_id). Identical keys reproduce
// identical draw sequences on any platform; fork() derives an independent
// substream from up to three indices, so each sampling unit (pair, cell,
// triple) inside a parallel sweep block owns its own stream and the result
// is invariant to thread count and iteration order.
class RngStream {
 public:
  RngStream() : RngStream(0, 0) {}

  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_(stream_id) {
    std::uint64_t x = rngdetail::mix64(seed + rngdetail::kGolden) ^
                      rngdetail::mix64(stream_id + 0x7f4a7c15ULL);
    for (int i = 0; i < 4; ++i) {
      x += rngdetail::kGolden;
      s_[i] = rngdetail::mix64(x);
    }
    if (!(s_[0] | s_[1] | s_[2] | s_[3])) s_[0] = rngdetail::kGolden;
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }

  RngStream fork(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const {
    std::uint64_t k = stream_;
    k = rngdetail::mix64(k + rngdetail::kGolden + a);
    k = rngdetail::mix64(k + rngdetail::kGolden + b);
    k = rngdetail::mix64(k + rngdetail::kGolden + c);
    return RngStream(seed_, k);
  }

  std::uint64_t next_u64() {
    const std::uint64_t out = rngdetail::rotl64(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rngdetail::rotl64(s_[3], 45);
    return out;
  }

  // Uniform on the open interval (0, 1); safe under log().
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s <= 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
  }

  double exponential() { return -std::log(uniform01()); }

  bool bernoulli(double p) { return uniform01() < p; }

  // Marsaglia-Tsang; shape > 0, rate > 0.
  double gamma(double shape, double rate) {
    if (shape < 1.0) {
      const double g = gamma(shape + 1.0, 1.0);
      return g * std::pow(uniform01(), 1.0 / shape) / rate;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
    }
  }

  // x ~ InvGamma(shape, scale): density proportional to x^(-shape-1) exp(-scale/x).
  double inverse_gamma(double shape, double scale) { return 1.0 / gamma(shape, scale); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t s_[4];
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace biplink
