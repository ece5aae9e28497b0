#include <gtest/gtest.h>

#include <random>

#include "ldl/metrics.hpp"
#include "oracles.hpp"

using namespace ldl;

namespace {

// Embed `img` in a larger image whose border is random garbage.
Image pad_with_garbage(const Image& img, std::size_t border, std::uint64_t seed) {
	Image out = oracle::random_image(img.height() + 2 * border, img.width() + 2 * border, img.channels(), seed);
	for (std::size_t y = 0; y < img.height(); ++y) {
		for (std::size_t x = 0; x < img.width(); ++x) {
			for (std::size_t k = 0; k < img.channels(); ++k) { out(y + border, x + border, k) = img(y, x, k); }
		}
	}
	return out;
}

MetricConfig no_crop() {
	MetricConfig cfg;
	cfg.border_crop = 0;
	return cfg;
}

} // namespace

TEST(Psnr, IdenticalGivesCap) {
	const Image a = oracle::random_image(16, 16, 3, 1);
	EXPECT_EQ(psnr_y(a, a), 100.0);
}

TEST(Psnr, UniformDifferences) {
	EXPECT_NEAR(psnr_y(Image(16, 16, 1, 0.5), Image(16, 16, 1, 0.6)), 20.0, 1e-9);
	EXPECT_NEAR(psnr_y(Image(16, 16, 1, 0.5), Image(16, 16, 1, 0.51)), 40.0, 1e-9);
}

TEST(Psnr, StrictlyDecreasingInDifference) {
	double prev = 1e9;
	for (int i = 1; i <= 40; ++i) {
		const double p = psnr_y(Image(12, 12, 1, 0.3), Image(12, 12, 1, 0.3 + i * 0.01));
		EXPECT_LT(p, prev);
		prev = p;
	}
}

TEST(Psnr, Errors) {
	EXPECT_THROW(psnr_y(Image(16, 16, 1), Image(16, 16, 3)), ShapeError);
	EXPECT_THROW(psnr_y(Image(8, 8, 1), Image(8, 8, 1)), ShapeError);
}

TEST(Ssim, IdenticalIsExactlyOne) {
	for (std::uint64_t seed = 0; seed < 5; ++seed) {
		const Image a = oracle::random_image(24, 20, 3, seed);
		EXPECT_EQ(ssim_y(a, a), 1.0);
	}
}

TEST(Ssim, ConstantImagesClosedForm) {
	const double c1 = 0.01 * 0.01;
	const double c2 = 0.03 * 0.03;
	const double want = (2.0 * 0.5 * 0.6 + c1) * c2 / ((0.25 + 0.36 + c1) * c2);
	EXPECT_NEAR(ssim_y(Image(20, 20, 1, 0.5), Image(20, 20, 1, 0.6)), want, 1e-9);
}

TEST(Ssim, MatchesDirectConvolution) {
	for (std::uint64_t seed = 0; seed < 5; ++seed) {
		const Image a = oracle::random_image(32, 32, 1, seed);
		const Image b = oracle::random_image(32, 32, 1, seed + 31);
		EXPECT_NEAR(ssim_y(a, b, no_crop()), oracle::ssim_direct(a, b), 1e-9);
	}
}

TEST(Ssim, TooSmall) {
	EXPECT_THROW(ssim_y(Image(18, 18, 1), Image(18, 18, 1)), ShapeError);
	EXPECT_NO_THROW(ssim_y(Image(19, 19, 1), Image(19, 19, 1)));
}

TEST(Metrics, BorderCropIgnoresGarbage) {
	const Image a = oracle::random_image(20, 22, 3, 3);
	const Image b = oracle::random_image(20, 22, 3, 4);
	const Image pa = pad_with_garbage(a, 4, 100);
	const Image pb = pad_with_garbage(b, 4, 200);
	EXPECT_EQ(psnr_y(pa, pb), psnr_y(a, b, no_crop()));
	EXPECT_EQ(ssim_y(pa, pb), ssim_y(a, b, no_crop()));
}

TEST(Mad, Basics) {
	const Image a = oracle::random_image(6, 6, 3, 10);
	const Image b = oracle::random_image(6, 6, 3, 11);
	const Image c = oracle::random_image(6, 6, 3, 12);
	EXPECT_EQ(mad(a, a), 0.0);
	EXPECT_NEAR(mad(Image(4, 4, 3, 0.1), Image(4, 4, 3, 0.3)), 0.2, 1e-15);
	EXPECT_EQ(mad(a, b), mad(b, a));
	EXPECT_LE(mad(a, c), mad(a, b) + mad(b, c) + 1e-15);
	EXPECT_THROW(mad(a, Image(6, 6, 1)), ShapeError);
}

TEST(MadSeries, Examples) {
	std::vector<Image> same(4, Image(3, 3, 1, 0.4));
	for (const MadEntry& e : mad_series(same, 2)) { EXPECT_EQ(e.mad, 0.0); }

	const Image f0 = oracle::random_image(3, 3, 1, 1);
	const Image f1 = oracle::random_image(3, 3, 1, 2);
	const auto two = mad_series({f0, f1}, 1);
	ASSERT_EQ(two.size(), 1u);
	EXPECT_EQ(two[0].k, 0u);
	EXPECT_EQ(two[0].mad, mad(f0, f1));

	const auto steps = mad_series({Image(2, 2, 1, 0.0), Image(2, 2, 1, 0.1), Image(2, 2, 1, 0.2)}, 2);
	ASSERT_EQ(steps.size(), 1u);
	EXPECT_NEAR(steps[0].mad, 0.2, 1e-15);

	EXPECT_THROW(mad_series({f0, f1}, 2), ConfigError);
	EXPECT_THROW(mad_series({f0, f1}, 0), ConfigError);
}
