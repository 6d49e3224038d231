#pragma once

#include <cstdint>
#include <cmath>
#include <string>
#include <vector>

namespace unitroot {

// Counter-based generator built on splitmix64.  Each draw advances a counter
// and hashes (seed, counter), so streams derived from independent seeds can
// be consumed in any order across threads while remaining bit-identical to a
// serial run.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t next_u64();

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform();

    // Standard normal via Box-Muller; draws are generated in pairs and the
    // spare is cached, so a fixed draw count consumes a fixed counter range.
    double normal();

    void fill_normal(std::vector<double>& out, std::size_t n);

    // Gamma(shape, 1) via Marsaglia-Tsang; chi-square with `dof` degrees of
    // freedom as 2 * Gamma(dof/2, 1).
    double gamma(double shape);
    double chi_square(double dof);

    std::uint64_t seed() const { return seed_; }

  private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Hash-combines a base seed with a list of stream tags (e.g. replication
// index, mechanism id) into a derived seed.  Stable across platforms.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags);

// FNV-1a of a string, for deriving stream tags from names.
std::uint64_t hash_tag(const std::string& s);

}  // namespace unitroot
