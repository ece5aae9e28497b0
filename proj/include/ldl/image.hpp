#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ldl {

/// Bad parameter value (window size, weights, thresholds, ...).
class ConfigError : public std::invalid_argument {
  public:
	using std::invalid_argument::invalid_argument;
};

/// Incompatible dimensions between operands, or a dimension precondition failed.
class ShapeError : public std::invalid_argument {
  public:
	using std::invalid_argument::invalid_argument;
};

/// File could not be read, decoded or written.
class IoError : public std::runtime_error {
  public:
	using std::runtime_error::runtime_error;
};

namespace detail {

struct ImageTraits {
	static constexpr const char* name = "Image";
	static bool channels_ok(std::size_t c) { return c == 1 || c == 3; }
	static bool value_ok(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }
};

struct ResidualTraits {
	static constexpr const char* name = "ResidualMap";
	static bool channels_ok(std::size_t c) { return c >= 1; }
	static bool value_ok(double v) { return std::isfinite(v); }
};

struct ArtifactTraits {
	static constexpr const char* name = "ArtifactMap";
	static bool channels_ok(std::size_t c) { return c == 1; }
	static bool value_ok(double v) { return std::isfinite(v) && v >= 0.0; }
};

} // namespace detail

/// Row-major H×W×C grid of doubles. The traits parameter fixes what the grid
/// means (intensities, signed residuals, nonnegative map) and which channel
/// counts and values are admissible at construction. Element access through
/// operator() is unchecked; callers that write values are responsible for
/// keeping them admissible (see clamp01 for images).
template <class Traits>
class Grid {
  public:
	using traits_type = Traits;

	Grid() = default;

	Grid(std::size_t height, std::size_t width, std::size_t channels, double fill = 0.0)
		: height_(height), width_(width), channels_(channels), data_(height * width * channels, fill) {
		check_shape();
		if (!data_.empty() && !Traits::value_ok(fill)) { throw ConfigError(std::string(Traits::name) + ": fill value out of range"); }
	}

	Grid(std::size_t height, std::size_t width, std::size_t channels, std::vector<double> data)
		: height_(height), width_(width), channels_(channels), data_(std::move(data)) {
		check_shape();
		if (data_.size() != height_ * width_ * channels_) {
			throw ShapeError(std::string(Traits::name) + ": data length " + std::to_string(data_.size()) + " does not match " +
							 std::to_string(height_) + "x" + std::to_string(width_) + "x" + std::to_string(channels_));
		}
		for (double v : data_) {
			if (!Traits::value_ok(v)) { throw ConfigError(std::string(Traits::name) + ": element out of range"); }
		}
	}

	[[nodiscard]] std::size_t height() const noexcept { return height_; }
	[[nodiscard]] std::size_t width() const noexcept { return width_; }
	[[nodiscard]] std::size_t channels() const noexcept { return channels_; }
	[[nodiscard]] std::size_t pixel_count() const noexcept { return height_ * width_; }
	[[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
	[[nodiscard]] bool empty() const noexcept { return data_.empty(); }

	[[nodiscard]] double& operator()(std::size_t y, std::size_t x, std::size_t c = 0) noexcept {
		return data_[(y * width_ + x) * channels_ + c];
	}
	[[nodiscard]] double operator()(std::size_t y, std::size_t x, std::size_t c = 0) const noexcept {
		return data_[(y * width_ + x) * channels_ + c];
	}

	[[nodiscard]] std::span<double> data() & noexcept { return data_; }
	[[nodiscard]] std::span<const double> data() const& noexcept { return data_; }
	// Views into a temporary would dangle.
	std::span<const double> data() && = delete;
	[[nodiscard]] const std::vector<double>& values() const& noexcept { return data_; }
	[[nodiscard]] std::vector<double> values() && noexcept { return std::move(data_); }

	[[nodiscard]] bool same_shape(const Grid& other) const noexcept {
		return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
	}

	template <class Other>
	[[nodiscard]] bool same_extent(const Grid<Other>& other) const noexcept {
		return height_ == other.height() && width_ == other.width();
	}

	friend bool operator==(const Grid&, const Grid&) = default;

  private:
	void check_shape() const {
		if (height_ == 0 || width_ == 0) { throw ShapeError(std::string(Traits::name) + ": dimensions must be positive"); }
		if (!Traits::channels_ok(channels_)) {
			throw ShapeError(std::string(Traits::name) + ": unsupported channel count " + std::to_string(channels_));
		}
	}

	std::size_t height_ = 0;
	std::size_t width_ = 0;
	std::size_t channels_ = 0;
	std::vector<double> data_;
};

using Image = Grid<detail::ImageTraits>;
using ResidualMap = Grid<detail::ResidualTraits>;
using ArtifactMap = Grid<detail::ArtifactTraits>;

inline std::string shape_string(std::size_t h, std::size_t w, std::size_t c) {
	return std::to_string(h) + "x" + std::to_string(w) + "x" + std::to_string(c);
}

template <class A, class B>
void require_same_shape(const Grid<A>& a, const Grid<B>& b, const char* what) {
	if (a.height() != b.height() || a.width() != b.width() || a.channels() != b.channels()) {
		throw ShapeError(std::string(what) + ": shape mismatch " + shape_string(a.height(), a.width(), a.channels()) + " vs " +
						 shape_string(b.height(), b.width(), b.channels()));
	}
}

template <class A, class B>
void require_same_extent(const Grid<A>& a, const Grid<B>& b, const char* what) {
	if (a.height() != b.height() || a.width() != b.width()) {
		throw ShapeError(std::string(what) + ": spatial mismatch " + std::to_string(a.height()) + "x" + std::to_string(a.width()) +
						 " vs " + std::to_string(b.height()) + "x" + std::to_string(b.width()));
	}
}

/// Clamp every element to [0,1] in place. NaN becomes 0.
inline void clamp01(Image& img) noexcept {
	for (double& v : img.data()) { v = std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0); }
}

/// Build an image from arbitrary reals, clamping into [0,1].
inline Image clamped_image(std::size_t h, std::size_t w, std::size_t c, std::vector<double> values) {
	for (double& v : values) { v = std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0); }
	return Image(h, w, c, std::move(values));
}

/// Luma in studio range (BT.601): Y = (16 + 65.481 R + 128.553 G + 24.966 B) / 255.
inline Image to_luma(const Image& img) {
	if (img.channels() != 3) { throw ShapeError("to_luma: expected 3 channels, got " + std::to_string(img.channels())); }
	Image y(img.height(), img.width(), 1);
	auto src = img.data();
	auto dst = y.data();
	for (std::size_t p = 0; p < dst.size(); ++p) {
		const double r = src[3 * p];
		const double g = src[3 * p + 1];
		const double b = src[3 * p + 2];
		dst[p] = (16.0 + 65.481 * r + 128.553 * g + 24.966 * b) / 255.0;
	}
	return y;
}

/// Arithmetic mean of all elements, accumulated in index order.
template <class T>
double mean_value(const Grid<T>& g) noexcept {
	double sum = 0.0;
	for (double v : g.data()) { sum += v; }
	return g.empty() ? 0.0 : sum / static_cast<double>(g.size());
}

template <class T>
double max_element(const Grid<T>& g) noexcept {
	double m = 0.0;
	bool first = true;
	for (double v : g.data()) {
		if (first || v > m) { m = v; }
		first = false;
	}
	return m;
}

} // namespace ldl
