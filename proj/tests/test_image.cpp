#include <gtest/gtest.h>

#include "ldl/image.hpp"
#include "oracles.hpp"

using namespace ldl;

TEST(Image, ConstructionChecksLengthAndRange) {
	EXPECT_NO_THROW(Image(2, 2, 3, std::vector<double>(12, 0.5)));
	EXPECT_THROW(Image(2, 2, 3, std::vector<double>(11, 0.5)), ShapeError);
	EXPECT_THROW(Image(1, 1, 1, std::vector<double>{1.5}), ConfigError);
	EXPECT_THROW(Image(1, 1, 1, std::vector<double>{std::nan("")}), ConfigError);
	EXPECT_THROW(Image(0, 4, 1), ShapeError);
	EXPECT_THROW(Image(2, 2, 2), ShapeError);
}

TEST(Image, RowMajorLayout) {
	Image img(2, 3, 3);
	img(1, 2, 1) = 0.25;
	EXPECT_EQ(img.data()[(1 * 3 + 2) * 3 + 1], 0.25);
	EXPECT_EQ(img.size(), 18u);
	EXPECT_EQ(img.pixel_count(), 6u);
}

TEST(Image, ResidualAndMapTraits) {
	EXPECT_NO_THROW(ResidualMap(1, 2, 3, std::vector<double>{-1, 1, 0.5, -0.5, 0, 0}));
	EXPECT_THROW(ArtifactMap(1, 1, 1, std::vector<double>{-0.1}), ConfigError);
	EXPECT_THROW(ArtifactMap(2, 2, 3), ShapeError);
}

TEST(Image, Clamp01) {
	Image img(1, 3, 1);
	img.data()[0] = -0.2;
	img.data()[1] = 0.4;
	img.data()[2] = 7.0;
	clamp01(img);
	EXPECT_EQ(img.data()[0], 0.0);
	EXPECT_EQ(img.data()[1], 0.4);
	EXPECT_EQ(img.data()[2], 1.0);
}

TEST(Luma, ClosedFormValues) {
	auto luma_of = [](double r, double g, double b) {
		return to_luma(Image(1, 1, 3, std::vector<double>{r, g, b})).values()[0];
	};
	EXPECT_NEAR(luma_of(0, 0, 0), 16.0 / 255.0, 1e-15);
	EXPECT_NEAR(luma_of(1, 1, 1), 235.0 / 255.0, 1e-15);
	EXPECT_NEAR(luma_of(1, 0, 0), (16.0 + 65.481) / 255.0, 1e-15);
	EXPECT_NEAR(luma_of(1, 0, 0), 0.31953, 1e-5);
}

TEST(Luma, RejectsSingleChannel) { EXPECT_THROW(to_luma(Image(2, 2, 1)), ShapeError); }

TEST(Luma, StaysInUnitRange) {
	for (std::uint64_t seed = 0; seed < 10; ++seed) {
		const Image y = to_luma(oracle::random_image(8, 8, 3, seed));
		for (double v : y.data()) {
			EXPECT_GE(v, 16.0 / 255.0 - 1e-15);
			EXPECT_LE(v, 235.0 / 255.0 + 1e-15);
		}
	}
}
