#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ldl/image.hpp"

namespace ldl {

/// Mean of each 2×2 block (stride 2).
inline Image downsample_avgpool2(const Image& img) {
	if (img.height() % 2 != 0 || img.width() % 2 != 0) {
		throw ShapeError("downsample_avgpool2: dimensions must be even, got " + std::to_string(img.height()) + "x" +
						 std::to_string(img.width()));
	}
	const std::size_t c = img.channels();
	Image out(img.height() / 2, img.width() / 2, c);
	for (std::size_t y = 0; y < out.height(); ++y) {
		for (std::size_t x = 0; x < out.width(); ++x) {
			for (std::size_t k = 0; k < c; ++k) {
				const double s = img(2 * y, 2 * x, k) + img(2 * y, 2 * x + 1, k) + img(2 * y + 1, 2 * x, k) + img(2 * y + 1, 2 * x + 1, k);
				out(y, x, k) = s * 0.25;
			}
		}
	}
	return out;
}

/// Keys cubic convolution kernel with a = -0.5.
constexpr double cubic_kernel(double x) noexcept {
	const double ax = x < 0 ? -x : x;
	const double ax2 = ax * ax;
	const double ax3 = ax2 * ax;
	if (ax <= 1.0) { return 1.5 * ax3 - 2.5 * ax2 + 1.0; }
	if (ax <= 2.0) { return -0.5 * ax3 + 2.5 * ax2 - 4.0 * ax + 2.0; }
	return 0.0;
}

/// Taps contributing to one output sample along an axis.
struct Contribution {
	std::vector<std::size_t> index;
	std::vector<double> weight;
};

/// Per-output-sample taps for resampling an axis of `in_length` samples by
/// `scale`. Downscaling widens the kernel by 1/scale. Weights are normalized
/// to sum to one and source positions outside the axis are clamped to the
/// nearest edge sample.
inline std::vector<Contribution> bicubic_contributions(std::size_t in_length, std::size_t out_length, double scale) {
	const bool antialias = scale < 1.0;
	const double kernel_width = antialias ? 4.0 / scale : 4.0;
	const auto taps = static_cast<std::ptrdiff_t>(std::ceil(kernel_width)) + 2;
	const auto last = static_cast<std::ptrdiff_t>(in_length) - 1;

	std::vector<Contribution> out(out_length);
	for (std::size_t i = 0; i < out_length; ++i) {
		// 1-based output position mapped to 1-based input coordinates.
		const double u = static_cast<double>(i + 1) / scale + 0.5 * (1.0 - 1.0 / scale);
		const auto left = static_cast<std::ptrdiff_t>(std::floor(u - kernel_width / 2.0));
		Contribution& c = out[i];
		double total = 0.0;
		for (std::ptrdiff_t t = 0; t < taps; ++t) {
			const std::ptrdiff_t pos = left + t; // 1-based
			const double d = u - static_cast<double>(pos);
			const double w = antialias ? scale * cubic_kernel(scale * d) : cubic_kernel(d);
			if (w == 0.0) { continue; }
			c.index.push_back(static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(pos - 1, 0, last)));
			c.weight.push_back(w);
			total += w;
		}
		for (double& w : c.weight) { w /= total; }
	}
	return out;
}

namespace detail {

inline std::size_t scaled_length(std::size_t n, double scale) {
	const double v = std::round(static_cast<double>(n) * scale);
	if (!(v >= 1.0)) { throw ShapeError("resize_bicubic: output dimension would be zero"); }
	return static_cast<std::size_t>(v);
}

// Resample a row-major h×w×c buffer along x (horizontal) to new_w.
inline std::vector<double> resample_rows(const std::vector<double>& src, std::size_t h, std::size_t w, std::size_t c,
										 const std::vector<Contribution>& taps) {
	const std::size_t new_w = taps.size();
	std::vector<double> dst(h * new_w * c, 0.0);
	for (std::size_t y = 0; y < h; ++y) {
		for (std::size_t x = 0; x < new_w; ++x) {
			const Contribution& t = taps[x];
			for (std::size_t k = 0; k < c; ++k) {
				double acc = 0.0;
				for (std::size_t j = 0; j < t.index.size(); ++j) { acc += t.weight[j] * src[(y * w + t.index[j]) * c + k]; }
				dst[(y * new_w + x) * c + k] = acc;
			}
		}
	}
	return dst;
}

inline std::vector<double> resample_cols(const std::vector<double>& src, std::size_t w, std::size_t c,
										 const std::vector<Contribution>& taps) {
	const std::size_t new_h = taps.size();
	std::vector<double> dst(new_h * w * c, 0.0);
	for (std::size_t y = 0; y < new_h; ++y) {
		const Contribution& t = taps[y];
		for (std::size_t x = 0; x < w; ++x) {
			for (std::size_t k = 0; k < c; ++k) {
				double acc = 0.0;
				for (std::size_t j = 0; j < t.index.size(); ++j) { acc += t.weight[j] * src[(t.index[j] * w + x) * c + k]; }
				dst[(y * w + x) * c + k] = acc;
			}
		}
	}
	return dst;
}

} // namespace detail

/// Unclamped separable bicubic resize (horizontal pass first). Exposed for
/// callers that need the overshoot, e.g. separability checks.
inline std::vector<double> resize_bicubic_raw(const Image& img, double scale) {
	if (!(scale > 0.0) || !std::isfinite(scale)) { throw ConfigError("resize_bicubic: scale must be positive"); }
	const std::size_t new_h = detail::scaled_length(img.height(), scale);
	const std::size_t new_w = detail::scaled_length(img.width(), scale);
	const auto col_taps = bicubic_contributions(img.width(), new_w, scale);
	const auto row_taps = bicubic_contributions(img.height(), new_h, scale);
	auto tmp = detail::resample_rows(img.values(), img.height(), img.width(), img.channels(), col_taps);
	return detail::resample_cols(tmp, new_w, img.channels(), row_taps);
}

/// Bicubic resize by `scale` with antialiasing on downscale; output size is
/// round(H*scale) × round(W*scale), clamped to [0,1]. scale == 1 returns the
/// input unchanged.
inline Image resize_bicubic(const Image& img, double scale) {
	if (!(scale > 0.0) || !std::isfinite(scale)) { throw ConfigError("resize_bicubic: scale must be positive"); }
	if (scale == 1.0) { return img; }
	auto values = resize_bicubic_raw(img, scale);
	return clamped_image(detail::scaled_length(img.height(), scale), detail::scaled_length(img.width(), scale), img.channels(),
						 std::move(values));
}

/// Bicubic downscale by an integer factor followed by the matching upscale,
/// producing a blurred image of the original size when the size divides.
inline Image bicubic_round_trip(const Image& img, int factor) {
	if (factor < 1) { throw ConfigError("bicubic_round_trip: factor must be >= 1"); }
	const double f = static_cast<double>(factor);
	return resize_bicubic(resize_bicubic(img, 1.0 / f), f);
}

} // namespace ldl
