#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ldl/colormap.hpp"
#include "ldl/image.hpp"

namespace ldl {

enum class Padding { reflect, zero };

/// Window size and global-scale exponent for artifact map construction.
class MapConfig {
  public:
	explicit MapConfig(int window = 7, double exponent = 5.0, Padding padding = Padding::reflect)
		: window_(window), exponent_(exponent), padding_(padding) {
		if (window < 3 || window % 2 == 0) { throw ConfigError("MapConfig: window must be odd and >= 3, got " + std::to_string(window)); }
		if (!(exponent > 0.0) || !std::isfinite(exponent)) { throw ConfigError("MapConfig: exponent must be positive"); }
	}

	[[nodiscard]] int window() const noexcept { return window_; }
	[[nodiscard]] int radius() const noexcept { return window_ / 2; }
	[[nodiscard]] double exponent() const noexcept { return exponent_; }
	[[nodiscard]] Padding padding() const noexcept { return padding_; }

  private:
	int window_;
	double exponent_;
	Padding padding_;
};

/// hr - sr, element-wise.
inline ResidualMap residual(const Image& hr, const Image& sr) {
	require_same_shape(hr, sr, "residual");
	ResidualMap r(hr.height(), hr.width(), hr.channels());
	auto a = hr.data();
	auto b = sr.data();
	auto out = r.data();
	for (std::size_t i = 0; i < out.size(); ++i) { out[i] = a[i] - b[i]; }
	return r;
}

/// Mirror an out-of-range index about the edge samples without repeating
/// the edge (…2 1 | 0 1 2 … n-1 | n-2 …). Works for any offset.
constexpr std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) noexcept {
	if (n == 1) { return 0; }
	const auto period = static_cast<std::ptrdiff_t>(2 * (n - 1));
	std::ptrdiff_t m = i % period;
	if (m < 0) { m += period; }
	return static_cast<std::size_t>(m < static_cast<std::ptrdiff_t>(n) ? m : period - m);
}

/// Primary artifact map: population variance of each n×n residual window,
/// per channel, averaged over channels.
///
/// Window sums of x and x² are taken on a channel-centered copy of the
/// residual, with a horizontal then a vertical pass in fixed order, so the
/// result is deterministic and no sliding accumulator drifts.
inline ArtifactMap local_variance_map(const ResidualMap& r, const MapConfig& cfg = MapConfig{}) {
	const std::size_t h = r.height();
	const std::size_t w = r.width();
	const std::size_t c = r.channels();
	const auto rad = static_cast<std::ptrdiff_t>(cfg.radius());
	const std::size_t n = static_cast<std::size_t>(cfg.window());
	const std::size_t ph = h + 2 * static_cast<std::size_t>(rad);
	const std::size_t pw = w + 2 * static_cast<std::size_t>(rad);
	const double inv_count = 1.0 / static_cast<double>(n * n);

	std::vector<double> padded(ph * pw);
	std::vector<double> row_x(ph * w);
	std::vector<double> row_xx(ph * w);
	std::vector<double> acc(h * w, 0.0);

	for (std::size_t k = 0; k < c; ++k) {
		double shift = 0.0;
		for (std::size_t p = 0; p < h * w; ++p) { shift += r.data()[p * c + k]; }
		shift /= static_cast<double>(h * w);

		for (std::size_t py = 0; py < ph; ++py) {
			const std::ptrdiff_t y = static_cast<std::ptrdiff_t>(py) - rad;
			const bool y_in = y >= 0 && y < static_cast<std::ptrdiff_t>(h);
			for (std::size_t px = 0; px < pw; ++px) {
				const std::ptrdiff_t x = static_cast<std::ptrdiff_t>(px) - rad;
				const bool x_in = x >= 0 && x < static_cast<std::ptrdiff_t>(w);
				double v = 0.0;
				if (cfg.padding() == Padding::reflect || (y_in && x_in)) {
					v = r(reflect_index(y, h), reflect_index(x, w), k);
				}
				padded[py * pw + px] = v - shift;
			}
		}

		for (std::size_t py = 0; py < ph; ++py) {
			const double* row = &padded[py * pw];
			for (std::size_t x = 0; x < w; ++x) {
				double s = 0.0;
				double ss = 0.0;
				for (std::size_t t = 0; t < n; ++t) {
					const double v = row[x + t];
					s += v;
					ss += v * v;
				}
				row_x[py * w + x] = s;
				row_xx[py * w + x] = ss;
			}
		}

		for (std::size_t y = 0; y < h; ++y) {
			for (std::size_t x = 0; x < w; ++x) {
				double s = 0.0;
				double ss = 0.0;
				for (std::size_t t = 0; t < n; ++t) {
					s += row_x[(y + t) * w + x];
					ss += row_xx[(y + t) * w + x];
				}
				const double mean = s * inv_count;
				acc[y * w + x] += std::max(0.0, ss * inv_count - mean * mean);
			}
		}
	}

	ArtifactMap m(h, w, 1);
	const double inv_c = 1.0 / static_cast<double>(c);
	for (std::size_t p = 0; p < h * w; ++p) { m.data()[p] = acc[p] * inv_c; }
	return m;
}

/// Population variance over every element (all channels jointly), two-pass on
/// values shifted by the first element so constant input gives exactly zero.
template <class T>
double population_variance(const Grid<T>& g) noexcept {
	if (g.empty()) { return 0.0; }
	const auto v = g.data();
	const double shift = v[0];
	double mean = 0.0;
	for (double x : v) { mean += x - shift; }
	mean /= static_cast<double>(v.size());
	double ss = 0.0;
	for (double x : v) {
		const double d = (x - shift) - mean;
		ss += d * d;
	}
	return ss / static_cast<double>(v.size());
}

/// var^(1/a); zero variance gives zero.
inline double sigma_from_variance(double variance, double exponent) {
	if (!(exponent > 0.0)) { throw ConfigError("sigma_from_variance: exponent must be positive"); }
	if (!(variance >= 0.0)) { throw ConfigError("sigma_from_variance: variance must be nonnegative"); }
	return variance == 0.0 ? 0.0 : std::pow(variance, 1.0 / exponent);
}

/// Patch-level scale factor σ = var(R)^(1/a).
inline double global_scale(const ResidualMap& r, const MapConfig& cfg = MapConfig{}) {
	return sigma_from_variance(population_variance(r), cfg.exponent());
}

inline ArtifactMap scale_map(const ArtifactMap& m, double sigma) {
	if (!(sigma >= 0.0) || !std::isfinite(sigma)) { throw ConfigError("scale_map: sigma must be finite and nonnegative"); }
	ArtifactMap out = m;
	for (double& v : out.data()) { v *= sigma; }
	return out;
}

/// Channel-mean |R| at one pixel.
inline double mean_abs_at(const ResidualMap& r, std::size_t y, std::size_t x) noexcept {
	double s = 0.0;
	for (std::size_t k = 0; k < r.channels(); ++k) { s += std::abs(r(y, x, k)); }
	return s / static_cast<double>(r.channels());
}

/// Keep the scaled map only where the live model is not closer to the
/// ground truth than the ensemble: zero where |R1| < |R2|, scaled value
/// otherwise (ties are penalized). |R| is the channel-mean absolute residual.
inline ArtifactMap refine_map(const ArtifactMap& scaled, const ResidualMap& r1, const ResidualMap& r2) {
	require_same_shape(r1, r2, "refine_map");
	require_same_extent(scaled, r1, "refine_map");
	ArtifactMap out(scaled.height(), scaled.width(), 1);
	for (std::size_t y = 0; y < scaled.height(); ++y) {
		for (std::size_t x = 0; x < scaled.width(); ++x) {
			out(y, x) = mean_abs_at(r1, y, x) < mean_abs_at(r2, y, x) ? 0.0 : scaled(y, x);
		}
	}
	return out;
}

enum class PatchType { A, B, C };

constexpr std::string_view to_string(PatchType t) noexcept {
	switch (t) {
	case PatchType::A: return "A";
	case PatchType::B: return "B";
	case PatchType::C: return "C";
	}
	return "?";
}

struct PatchThresholds {
	double a_b = 0.32;
	double b_c = 0.53;
};

/// Smooth (A), texture (B) or fine regular structure (C) by patch σ.
inline PatchType classify_patch(double sigma, const PatchThresholds& t = PatchThresholds{}) {
	if (!(t.a_b >= 0.0) || !(t.a_b < t.b_c)) { throw ConfigError("classify_patch: thresholds must satisfy 0 <= t_ab < t_bc"); }
	if (sigma < t.a_b) { return PatchType::A; }
	if (sigma < t.b_c) { return PatchType::B; }
	return PatchType::C;
}

/// Color-table index for a map value normalized by max_value.
inline std::size_t heat_index(double v, double max_value) noexcept {
	const double t = std::clamp(v / max_value, 0.0, 1.0);
	return static_cast<std::size_t>(std::lround(t * 255.0));
}

/// Render a map through the heat color table. Without max_value the map
/// maximum is used (1 for an all-zero map).
inline Image render_heatmap(const ArtifactMap& m, std::optional<double> max_value = std::nullopt) {
	double scale = 1.0;
	if (max_value) {
		if (!(*max_value > 0.0) || !std::isfinite(*max_value)) { throw ConfigError("render_heatmap: max_value must be positive"); }
		scale = *max_value;
	} else {
		const double mx = max_element(m);
		scale = mx > 0.0 ? mx : 1.0;
	}
	Image out(m.height(), m.width(), 3);
	for (std::size_t p = 0; p < m.pixel_count(); ++p) {
		const Rgb8& rgb = kHeatTable[heat_index(m.data()[p], scale)];
		for (std::size_t k = 0; k < 3; ++k) { out.data()[3 * p + k] = rgb[k] / 255.0; }
	}
	return out;
}

/// All intermediate products of the map pipeline for one (hr, sr[, sr2]) input.
struct ArtifactMaps {
	ResidualMap residual;
	ArtifactMap primary;
	double sigma = 0.0;
	ArtifactMap scaled;
	std::optional<ArtifactMap> refined;
};

inline ArtifactMaps build_artifact_maps(const Image& hr, const Image& sr, const Image* ensemble_sr = nullptr,
										const MapConfig& cfg = MapConfig{}) {
	ArtifactMaps maps;
	maps.residual = residual(hr, sr);
	maps.primary = local_variance_map(maps.residual, cfg);
	maps.sigma = global_scale(maps.residual, cfg);
	maps.scaled = scale_map(maps.primary, maps.sigma);
	if (ensemble_sr != nullptr) { maps.refined = refine_map(maps.scaled, maps.residual, residual(hr, *ensemble_sr)); }
	return maps;
}

} // namespace ldl
