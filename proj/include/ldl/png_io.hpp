#pragma once

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <system_error>
#include <vector>

#include "ldl/image.hpp"

namespace ldl {

namespace detail {

struct FileCloser {
	void operator()(std::FILE* f) const noexcept {
		if (f != nullptr) { std::fclose(f); }
	}
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// State shared with the setjmp frames below. It lives on the heap so that
// nothing in the jumping frame is modified between setjmp and longjmp.
struct PngReadState {
	std::uint32_t width = 0;
	std::uint32_t height = 0;
	int bit_depth = 0;
	int color_type = 0;
	std::size_t channels = 0;
	std::vector<unsigned char> pixels;
	std::vector<png_bytep> rows;
	std::string error;
};

inline void png_error_handler(png_structp png, png_const_charp msg) {
	auto* error = static_cast<std::string*>(png_get_error_ptr(png));
	if (error != nullptr) { *error = msg; }
	png_longjmp(png, 1);
}

inline void png_warning_handler(png_structp, png_const_charp) {}

// Returns false on a libpng error (message in state.error) or an unsupported
// color type (state.error set, color_type recorded).
inline bool read_png_stream(std::FILE* fp, PngReadState& state) {
	png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &state.error, png_error_handler, png_warning_handler);
	if (png == nullptr) {
		state.error = "cannot allocate decoder";
		return false;
	}
	png_infop info = png_create_info_struct(png);
	if (info == nullptr) {
		png_destroy_read_struct(&png, nullptr, nullptr);
		state.error = "cannot allocate decoder";
		return false;
	}
	if (setjmp(png_jmpbuf(png))) {
		png_destroy_read_struct(&png, &info, nullptr);
		if (state.error.empty()) { state.error = "corrupt stream"; }
		return false;
	}
	png_init_io(png, fp);
	png_read_info(png, info);

	state.width = png_get_image_width(png, info);
	state.height = png_get_image_height(png, info);
	state.bit_depth = png_get_bit_depth(png, info);
	state.color_type = png_get_color_type(png, info);

	switch (state.color_type) {
	case PNG_COLOR_TYPE_GRAY:
		if (state.bit_depth < 8) { png_set_expand_gray_1_2_4_to_8(png); }
		state.channels = 1;
		break;
	case PNG_COLOR_TYPE_GRAY_ALPHA:
		png_set_strip_alpha(png);
		state.channels = 1;
		break;
	case PNG_COLOR_TYPE_RGB:
		state.channels = 3;
		break;
	case PNG_COLOR_TYPE_RGB_ALPHA:
		png_set_strip_alpha(png);
		state.channels = 3;
		break;
	default:
		png_destroy_read_struct(&png, &info, nullptr);
		state.error = "unsupported PNG color type " + std::to_string(state.color_type);
		return false;
	}
	if (state.bit_depth < 8) { state.bit_depth = 8; }
	png_set_interlace_handling(png);
	png_read_update_info(png, info);

	const std::size_t row_bytes = png_get_rowbytes(png, info);
	state.pixels.resize(row_bytes * state.height);
	state.rows.resize(state.height);
	for (std::uint32_t y = 0; y < state.height; ++y) { state.rows[y] = state.pixels.data() + y * row_bytes; }
	png_read_image(png, state.rows.data());
	png_read_end(png, nullptr);
	png_destroy_read_struct(&png, &info, nullptr);
	return true;
}

inline bool write_png_stream(std::FILE* fp, const std::vector<unsigned char>& bytes, std::uint32_t width, std::uint32_t height,
							 std::size_t channels, std::string& error) {
	png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, png_error_handler, png_warning_handler);
	if (png == nullptr) {
		error = "cannot allocate encoder";
		return false;
	}
	png_infop info = png_create_info_struct(png);
	if (info == nullptr) {
		png_destroy_write_struct(&png, nullptr);
		error = "cannot allocate encoder";
		return false;
	}
	if (setjmp(png_jmpbuf(png))) {
		png_destroy_write_struct(&png, &info);
		if (error.empty()) { error = "encoder failure"; }
		return false;
	}
	png_init_io(png, fp);
	// Fixed encoder settings keep the output byte-identical across runs.
	png_set_compression_level(png, 6);
	png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_FILTER_NONE);
	png_set_IHDR(png, info, width, height, 8, channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
				 PNG_COMPRESSION_TYPE_BASE, PNG_FILTER_TYPE_BASE);
	png_write_info(png, info);
	const std::size_t row_bytes = static_cast<std::size_t>(width) * channels;
	for (std::uint32_t y = 0; y < height; ++y) {
		png_write_row(png, const_cast<png_bytep>(bytes.data() + y * row_bytes));
	}
	png_write_end(png, nullptr);
	png_destroy_write_struct(&png, &info);
	return true;
}

} // namespace detail

/// 8-bit quantization: clamp to [0,1], then round half away from zero.
inline unsigned char quantize8(double v) noexcept {
	if (std::isnan(v)) { v = 0.0; }
	v = std::clamp(v, 0.0, 1.0);
	return static_cast<unsigned char>(std::lround(v * 255.0));
}

/// Read an 8- or 16-bit gray/RGB PNG; alpha is discarded, palette images are rejected.
inline Image load_png(const std::filesystem::path& path) {
	detail::FilePtr fp(std::fopen(path.string().c_str(), "rb"));
	if (!fp) { throw IoError(path.string() + ": cannot open file"); }

	unsigned char signature[8] = {};
	if (std::fread(signature, 1, 8, fp.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0) {
		throw IoError(path.string() + ": not a PNG file");
	}
	std::rewind(fp.get());

	auto state = std::make_unique<detail::PngReadState>();
	if (!detail::read_png_stream(fp.get(), *state)) { throw IoError(path.string() + ": " + state->error); }

	const std::size_t count = static_cast<std::size_t>(state->width) * state->height * state->channels;
	std::vector<double> values(count);
	if (state->bit_depth == 16) {
		for (std::size_t i = 0; i < count; ++i) {
			const unsigned hi = state->pixels[2 * i];
			const unsigned lo = state->pixels[2 * i + 1];
			values[i] = static_cast<double>((hi << 8) | lo) / 65535.0;
		}
	} else {
		for (std::size_t i = 0; i < count; ++i) { values[i] = static_cast<double>(state->pixels[i]) / 255.0; }
	}
	return Image(state->height, state->width, state->channels, std::move(values));
}

/// Write an 8-bit PNG. The file is written to a sibling temporary and renamed
/// into place.
inline void save_png(const Image& img, const std::filesystem::path& path) {
	std::vector<unsigned char> bytes(img.size());
	auto src = img.data();
	for (std::size_t i = 0; i < bytes.size(); ++i) { bytes[i] = quantize8(src[i]); }

	std::filesystem::path tmp = path;
	tmp += ".tmp";
	{
		detail::FilePtr fp(std::fopen(tmp.string().c_str(), "wb"));
		if (!fp) { throw IoError(path.string() + ": cannot open for writing"); }
		std::string error;
		if (!detail::write_png_stream(fp.get(), bytes, static_cast<std::uint32_t>(img.width()),
									  static_cast<std::uint32_t>(img.height()), img.channels(), error)) {
			fp.reset();
			std::error_code ec;
			std::filesystem::remove(tmp, ec);
			throw IoError(path.string() + ": " + error);
		}
		if (std::fflush(fp.get()) != 0) { throw IoError(path.string() + ": write failed"); }
	}
	std::error_code ec;
	std::filesystem::rename(tmp, path, ec);
	if (ec) {
		std::filesystem::remove(tmp, ec);
		throw IoError(path.string() + ": cannot rename temporary file");
	}
}

} // namespace ldl
