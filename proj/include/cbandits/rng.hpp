#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <string_view>
#include <vector>

namespace cbandits {

// Splittable counter-based generator in the style of SplitMix64
// (Steele, Lea & Flood 2014). Each stream is (state, gamma); output n
// is mix64(seed + n*gamma), so independent streams can be derived by
// hashing tags instead of by sharing a sequence.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t seed) : state_(seed), gamma_(kGoldenGamma) {}
  RandomStream(std::uint64_t seed, std::uint64_t gamma) : state_(seed), gamma_(gamma | 1u) {}

  static constexpr std::uint64_t min() { return 0; }
  static constexpr std::uint64_t max() { return ~std::uint64_t{0}; }

  std::uint64_t operator()() { return next_u64(); }

  std::uint64_t next_u64() {
    state_ += gamma_;
    return mix64(state_);
  }

  /// Independent child stream; parent and child sequences do not overlap.
  RandomStream split() {
    std::uint64_t seed = next_u64();
    std::uint64_t g = mix_gamma(state_ + gamma_);
    state_ += gamma_;
    return RandomStream(seed, g);
  }

  // Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform double in (0, 1] (safe for log()).
  double uniform_pos() { return 1.0 - uniform(); }

  // Uniform integer in [0, n). Multiply-shift; bias is O(n/2^64).
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  bool bernoulli(double p) { return uniform() < p; }

  double normal() {
    double u1 = uniform_pos();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  // Marsaglia-Tsang with the alpha<1 boost.
  double gamma(double alpha) {
    if (alpha < 1.0) {
      double u = uniform_pos();
      return gamma(alpha + 1.0) * std::pow(u, 1.0 / alpha);
    }
    double d = alpha - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double t = 1.0 + c * x;
      if (t <= 0.0) continue;
      double v = t * t * t;
      double u = uniform_pos();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double beta(double a, double b) {
    double x = gamma(a);
    double y = gamma(b);
    return x / (x + y);
  }

  std::vector<double> dirichlet(const std::vector<double>& alpha) {
    std::vector<double> out(alpha.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      out[i] = gamma(alpha[i]);
      sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
  }

  static std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

  static std::uint64_t mix_gamma(std::uint64_t z) {
    z = (z ^ (z >> 33)) * 0xff51afd7ed558ccdULL;
    z = (z ^ (z >> 33)) * 0xc4ceb9fe1a85ec53ULL;
    z = (z ^ (z >> 33)) | 1u;
    int pairs = __builtin_popcountll(z ^ (z >> 1));
    return pairs < 24 ? z ^ 0xaaaaaaaaaaaaaaaaULL : z;
  }

  std::uint64_t state_;
  std::uint64_t gamma_;
};

inline std::uint64_t hash_tag(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Stream derived from a master seed and a list of integer tags.
/// Derivation is order-sensitive and scheduler-independent, so parallel
/// and serial runs see identical streams.
inline RandomStream derive_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = RandomStream::mix64(seed ^ 0x5851f42d4c957f2dULL);
  for (std::uint64_t t : tags) h = RandomStream::mix64(h ^ RandomStream::mix64(t));
  return RandomStream(h);
}

}  // namespace cbandits
