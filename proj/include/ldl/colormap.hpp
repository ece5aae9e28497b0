#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace ldl {

using Rgb8 = std::array<std::uint8_t, 3>;

namespace detail {

// Control points of a black-body style ramp (black, violet, red, orange, yellow, white).
inline constexpr std::array<std::array<double, 4>, 6> kHeatStops{{
	{0.00, 0.0, 0.0, 0.0},
	{0.25, 87.0, 16.0, 110.0},
	{0.50, 188.0, 55.0, 84.0},
	{0.75, 249.0, 142.0, 9.0},
	{0.90, 245.0, 219.0, 76.0},
	{1.00, 255.0, 255.0, 255.0},
}};

constexpr std::uint8_t round_byte(double v) { return static_cast<std::uint8_t>(v + 0.5); }

constexpr std::array<Rgb8, 256> make_heat_table() {
	std::array<Rgb8, 256> table{};
	for (std::size_t i = 0; i < 256; ++i) {
		const double t = static_cast<double>(i) / 255.0;
		std::size_t s = 0;
		while (s + 2 < kHeatStops.size() && t > kHeatStops[s + 1][0]) { ++s; }
		const auto& a = kHeatStops[s];
		const auto& b = kHeatStops[s + 1];
		const double f = (t - a[0]) / (b[0] - a[0]);
		for (std::size_t k = 0; k < 3; ++k) { table[i][k] = round_byte(a[k + 1] + f * (b[k + 1] - a[k + 1])); }
	}
	return table;
}

} // namespace detail

/// 256-entry heat color table. Index 0 is black, 255 is white, and perceived
/// brightness grows with the index.
inline constexpr std::array<Rgb8, 256> kHeatTable = detail::make_heat_table();

} // namespace ldl
