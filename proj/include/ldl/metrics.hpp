#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ldl/image.hpp"

namespace ldl {

/// Evaluation settings for the Y-channel fidelity metrics.
struct MetricConfig {
	std::size_t border_crop = 4;
	double psnr_cap = 100.0;
	std::size_t ssim_window = 11;
	double ssim_sigma = 1.5;
	double k1 = 0.01;
	double k2 = 0.03;
	double dynamic_range = 1.0;
};

namespace detail {

inline Image luma_plane(const Image& img) { return img.channels() == 3 ? to_luma(img) : img; }

inline Image crop_border(const Image& img, std::size_t border) {
	if (2 * border >= img.height() || 2 * border >= img.width()) {
		throw ShapeError("border crop " + std::to_string(border) + " too large for " + std::to_string(img.height()) + "x" +
						 std::to_string(img.width()));
	}
	if (border == 0) { return img; }
	const std::size_t h = img.height() - 2 * border;
	const std::size_t w = img.width() - 2 * border;
	Image out(h, w, img.channels());
	for (std::size_t y = 0; y < h; ++y) {
		for (std::size_t x = 0; x < w; ++x) {
			for (std::size_t k = 0; k < img.channels(); ++k) { out(y, x, k) = img(y + border, x + border, k); }
		}
	}
	return out;
}

inline std::pair<Image, Image> prepared_pair(const Image& a, const Image& b, const MetricConfig& cfg, const char* what) {
	require_same_shape(a, b, what);
	return {crop_border(luma_plane(a), cfg.border_crop), crop_border(luma_plane(b), cfg.border_crop)};
}

// Separable "valid" filtering of a row-major h×w plane with a normalized 1-D kernel.
inline std::vector<double> filter_valid(const std::vector<double>& src, std::size_t h, std::size_t w, const std::vector<double>& kernel) {
	const std::size_t n = kernel.size();
	const std::size_t ow = w - n + 1;
	const std::size_t oh = h - n + 1;
	std::vector<double> tmp(h * ow);
	for (std::size_t y = 0; y < h; ++y) {
		for (std::size_t x = 0; x < ow; ++x) {
			double acc = 0.0;
			for (std::size_t t = 0; t < n; ++t) { acc += kernel[t] * src[y * w + x + t]; }
			tmp[y * ow + x] = acc;
		}
	}
	std::vector<double> out(oh * ow);
	for (std::size_t y = 0; y < oh; ++y) {
		for (std::size_t x = 0; x < ow; ++x) {
			double acc = 0.0;
			for (std::size_t t = 0; t < n; ++t) { acc += kernel[t] * tmp[(y + t) * ow + x]; }
			out[y * ow + x] = acc;
		}
	}
	return out;
}

} // namespace detail

/// Normalized 1-D Gaussian of odd length.
inline std::vector<double> gaussian_kernel(std::size_t length, double sigma) {
	if (length % 2 == 0 || length == 0) { throw ConfigError("gaussian_kernel: length must be odd"); }
	if (!(sigma > 0.0)) { throw ConfigError("gaussian_kernel: sigma must be positive"); }
	std::vector<double> k(length);
	const double centre = static_cast<double>(length / 2);
	double total = 0.0;
	for (std::size_t i = 0; i < length; ++i) {
		const double d = static_cast<double>(i) - centre;
		k[i] = std::exp(-(d * d) / (2.0 * sigma * sigma));
		total += k[i];
	}
	for (double& v : k) { v /= total; }
	return k;
}

/// PSNR in dB on the border-cropped Y plane; psnr_cap when the planes agree.
inline double psnr_y(const Image& a, const Image& b, const MetricConfig& cfg = MetricConfig{}) {
	auto [ya, yb] = detail::prepared_pair(a, b, cfg, "psnr_y");
	double sum = 0.0;
	for (std::size_t i = 0; i < ya.size(); ++i) {
		const double d = ya.data()[i] - yb.data()[i];
		sum += d * d;
	}
	const double mse = sum / static_cast<double>(ya.size());
	if (mse == 0.0) { return cfg.psnr_cap; }
	return std::min(cfg.psnr_cap, 10.0 * std::log10(cfg.dynamic_range * cfg.dynamic_range / mse));
}

/// Mean SSIM on the border-cropped Y plane, Gaussian window, valid region only.
inline double ssim_y(const Image& a, const Image& b, const MetricConfig& cfg = MetricConfig{}) {
	auto [ya, yb] = detail::prepared_pair(a, b, cfg, "ssim_y");
	const std::size_t n = cfg.ssim_window;
	const std::size_t h = ya.height();
	const std::size_t w = ya.width();
	if (h < n || w < n) {
		throw ShapeError("ssim_y: image " + std::to_string(h) + "x" + std::to_string(w) + " smaller than the " + std::to_string(n) +
						 "-pixel window after cropping");
	}
	const auto kernel = gaussian_kernel(n, cfg.ssim_sigma);
	const double c1 = (cfg.k1 * cfg.dynamic_range) * (cfg.k1 * cfg.dynamic_range);
	const double c2 = (cfg.k2 * cfg.dynamic_range) * (cfg.k2 * cfg.dynamic_range);

	const std::vector<double>& pa = ya.values();
	const std::vector<double>& pb = yb.values();
	std::vector<double> aa(pa.size());
	std::vector<double> bb(pa.size());
	std::vector<double> ab(pa.size());
	for (std::size_t i = 0; i < pa.size(); ++i) {
		aa[i] = pa[i] * pa[i];
		bb[i] = pb[i] * pb[i];
		ab[i] = pa[i] * pb[i];
	}
	const auto mu_a = detail::filter_valid(pa, h, w, kernel);
	const auto mu_b = detail::filter_valid(pb, h, w, kernel);
	const auto e_aa = detail::filter_valid(aa, h, w, kernel);
	const auto e_bb = detail::filter_valid(bb, h, w, kernel);
	const auto e_ab = detail::filter_valid(ab, h, w, kernel);

	double total = 0.0;
	for (std::size_t i = 0; i < mu_a.size(); ++i) {
		const double ma = mu_a[i];
		const double mb = mu_b[i];
		const double var_a = e_aa[i] - ma * ma;
		const double var_b = e_bb[i] - mb * mb;
		const double cov = e_ab[i] - ma * mb;
		const double num = (2.0 * ma * mb + c1) * (2.0 * cov + c2);
		const double den = (ma * ma + mb * mb + c1) * (var_a + var_b + c2);
		total += num / den;
	}
	return total / static_cast<double>(mu_a.size());
}

/// Mean absolute difference over all elements.
inline double mad(const Image& a, const Image& b) {
	require_same_shape(a, b, "mad");
	double sum = 0.0;
	for (std::size_t i = 0; i < a.size(); ++i) { sum += std::abs(a.data()[i] - b.data()[i]); }
	return sum / static_cast<double>(a.size());
}

struct MadEntry {
	std::size_t k = 0;
	double mad = 0.0;
};

/// MAD between frame k and frame k+gap for every valid k, in order.
inline std::vector<MadEntry> mad_series(const std::vector<Image>& frames, std::size_t gap) {
	if (gap == 0) { throw ConfigError("mad_series: gap must be positive"); }
	if (gap >= frames.size()) {
		throw ConfigError("mad_series: gap " + std::to_string(gap) + " requires more than " + std::to_string(frames.size()) + " frames");
	}
	std::vector<MadEntry> out;
	out.reserve(frames.size() - gap);
	for (std::size_t k = 0; k + gap < frames.size(); ++k) { out.push_back({k, mad(frames[k], frames[k + gap])}); }
	return out;
}

} // namespace ldl
