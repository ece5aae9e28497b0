#pragma once

#include <cstddef>

#include "ldl/image.hpp"

namespace ldl {

/// Checkerboard blended with a diagonal ramp; each channel uses a slightly
/// different blend so color residuals are not identical across channels.
inline Image checker_ramp(std::size_t size = 64, std::size_t cell = 4, std::size_t channels = 3) {
	Image img(size, size, channels);
	const double span = static_cast<double>(2 * (size - 1));
	for (std::size_t y = 0; y < size; ++y) {
		for (std::size_t x = 0; x < size; ++x) {
			const double checker = ((y / cell + x / cell) % 2 == 0) ? 1.0 : 0.0;
			const double ramp = static_cast<double>(x + y) / span;
			for (std::size_t k = 0; k < channels; ++k) {
				const double wc = 0.6 - 0.1 * static_cast<double>(k);
				img(y, x, k) = wc * checker + (1.0 - wc) * ramp;
			}
		}
	}
	return img;
}

} // namespace ldl
