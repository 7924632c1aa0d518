#pragma once

#include <array>
#include <cstdint>
#include <utility>

namespace h2hinf {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    explicit Philox4x32(Key key) : key_(key) {}
    // Low word first.
    explicit Philox4x32(std::uint64_t seed)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

    [[nodiscard]] Counter operator()(Counter ctr) const;
    [[nodiscard]] const Key& key() const { return key_; }

private:
    Key key_;
};

// Two doubles strictly inside (0, 1) from one block, 52 bits each.
std::pair<double, double> uniform_pair(const Philox4x32::Counter& block);

// Two independent standard normals (Box-Muller on uniform_pair).
std::pair<double, double> normal_pair(const Philox4x32::Counter& block);

} // namespace h2hinf
