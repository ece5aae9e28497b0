#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "ldl/cli.hpp"
#include "ldl/synthetic.hpp"
#include "oracles.hpp"

using namespace ldl;
namespace fs = std::filesystem;

namespace {

struct CliResult {
	int code;
	std::string out;
	std::string err;
};

CliResult run(const std::vector<std::string>& args) {
	std::ostringstream out;
	std::ostringstream err;
	const int code = cli::run_cli(args, out, err);
	return {code, out.str(), err.str()};
}

cli::Json json_of(const std::string& s) { return cli::Json::parse(s); }

std::string slurp(const fs::path& p) {
	std::ifstream in(p, std::ios::binary);
	return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class CliTest : public ::testing::Test {
  protected:
	void SetUp() override {
		dir_ = oracle::scratch_dir(::testing::UnitTest::GetInstance()->current_test_info()->name());
		hr_ = (dir_ / "hr.png").string();
		sr_ = (dir_ / "sr.png").string();
		sr2_ = (dir_ / "sr2.png").string();
		const Image hr = checker_ramp(32, 4, 3);
		save_png(hr, hr_);
		save_png(default_start(hr), sr_);
		save_png(oracle::random_image(32, 32, 3, 3), sr2_);
	}

	fs::path dir_;
	std::string hr_, sr_, sr2_;
};

} // namespace

TEST_F(CliTest, MapIdenticalInputs) {
	const auto out = (dir_ / "same").string();
	const CliResult r = run({"map", "--hr", hr_, "--sr", hr_, "--out-dir", out});
	ASSERT_EQ(r.code, 0) << r.err;
	const auto report = json_of(slurp(fs::path(out) / "map.json"));
	EXPECT_EQ(report["sigma"].get<double>(), 0.0);
	EXPECT_EQ(report["map_mean"].get<double>(), 0.0);
	EXPECT_EQ(report["label"].get<std::string>(), "A");
	const Image m = load_png(fs::path(out) / "m.png");
	for (std::size_t p = 0; p < m.pixel_count(); ++p) {
		for (std::size_t k = 0; k < 3; ++k) { EXPECT_EQ(quantize8(m.data()[3 * p + k]), kHeatTable[0][k]); }
	}
	EXPECT_FALSE(fs::exists(fs::path(out) / "m_refine.png"));
}

TEST_F(CliTest, MapWritesAllProducts) {
	const auto out = (dir_ / "maps").string();
	const CliResult r = run({"map", "--hr", hr_, "--sr", sr_, "--sr2", sr2_, "--out-dir", out, "--n", "5"});
	ASSERT_EQ(r.code, 0) << r.err;
	for (const char* f : {"residual.png", "m.png", "m_scaled.png", "m_refine.png", "map.json"}) {
		EXPECT_TRUE(fs::exists(fs::path(out) / f)) << f;
	}
	const auto report = json_of(slurp(fs::path(out) / "map.json"));
	std::vector<std::string> keys;
	for (const auto& [k, v] : report.items()) { keys.push_back(k); }
	EXPECT_EQ(keys, (std::vector<std::string>{"sigma", "map_mean", "label"}));
	const Image hr = load_png(hr_);
	const Image sr = load_png(sr_);
	EXPECT_NEAR(report["sigma"].get<double>(), global_scale(residual(hr, sr)), 1e-15);
}

TEST_F(CliTest, LossJson) {
	const CliResult r = run({"loss", "--hr", hr_, "--sr", sr_, "--beta", "0.5", "--reduction", "sum"});
	ASSERT_EQ(r.code, 0) << r.err;
	const auto j = json_of(r.out);
	std::vector<std::string> keys;
	for (const auto& [k, v] : j.items()) { keys.push_back(k); }
	EXPECT_EQ(keys, (std::vector<std::string>{"l1", "artifact", "combined", "reduction", "beta", "lambda1"}));
	const Image hr = load_png(hr_);
	const Image sr = load_png(sr_);
	const ArtifactMap m = build_artifact_maps(hr, sr).scaled;
	EXPECT_NEAR(j["l1"].get<double>(), l1_loss(hr, sr, Reduction::sum), 1e-12);
	EXPECT_NEAR(j["artifact"].get<double>(), artifact_loss(hr, sr, m, Reduction::sum), 1e-12);
	EXPECT_NEAR(j["combined"].get<double>(), j["l1"].get<double>() + 0.5 * j["artifact"].get<double>(), 1e-12);
	EXPECT_EQ(j["reduction"], "sum");
}

TEST_F(CliTest, LossWithMapFileAndRefinement) {
	const auto map_png = (dir_ / "weights.png").string();
	save_png(Image(32, 32, 1, 1.0), map_png);
	const CliResult r = run({"loss", "--hr", hr_, "--sr", sr_, "--map", map_png});
	ASSERT_EQ(r.code, 0) << r.err;
	const auto j = json_of(r.out);
	EXPECT_NEAR(j["artifact"].get<double>(), j["l1"].get<double>(), 1e-15);

	const CliResult r2 = run({"loss", "--hr", hr_, "--sr", sr_, "--sr2", sr2_});
	EXPECT_EQ(r2.code, 0) << r2.err;
	EXPECT_EQ(run({"loss", "--hr", hr_, "--sr", sr_, "--sr2", sr2_, "--map", map_png}).code, 2);
}

TEST_F(CliTest, MetricsIdentical) {
	const CliResult r = run({"metrics", "--a", hr_, "--b", hr_});
	ASSERT_EQ(r.code, 0) << r.err;
	const auto j = json_of(r.out);
	EXPECT_EQ(j["psnr"].get<double>(), 100.0);
	EXPECT_EQ(j["ssim"].get<double>(), 1.0);
	EXPECT_EQ(j["mad"].get<double>(), 0.0);
}

TEST_F(CliTest, Degrade) {
	const auto out = (dir_ / "lr.png").string();
	ASSERT_EQ(run({"degrade", "--in", hr_, "--out", out, "--mode", "bicubic4"}).code, 0);
	EXPECT_EQ(load_png(out).width(), 8u);
	ASSERT_EQ(run({"degrade", "--in", hr_, "--out", out, "--mode", "avgpool2"}).code, 0);
	EXPECT_EQ(load_png(out).width(), 16u);
	EXPECT_EQ(run({"degrade", "--in", hr_, "--out", out, "--mode", "nearest"}).code, 2);
}

TEST_F(CliTest, StabilitySeries) {
	const fs::path frames = dir_ / "frames";
	fs::create_directories(frames);
	// Written out of order; processing must sort by filename.
	save_png(Image(4, 4, 1, 0.2), frames / "f002.png");
	save_png(Image(4, 4, 1, 0.0), frames / "f000.png");
	save_png(Image(4, 4, 1, 0.4), frames / "f001.png");
	const auto csv = (dir_ / "series.csv").string();
	ASSERT_EQ(run({"stability", "--frames", frames.string(), "--gap", "1", "--out", csv}).code, 0);
	std::istringstream is(slurp(csv));
	std::string header, l0, l1;
	std::getline(is, header);
	std::getline(is, l0);
	std::getline(is, l1);
	EXPECT_EQ(header, "k,mad");
	EXPECT_EQ(l0.substr(0, 2), "0,");
	EXPECT_NEAR(std::stod(l0.substr(2)), 102.0 / 255.0, 1e-12);
	EXPECT_NEAR(std::stod(l1.substr(2)), 51.0 / 255.0, 1e-12);
	EXPECT_EQ(run({"stability", "--frames", frames.string(), "--gap", "3", "--out", csv}).code, 2);
}

TEST_F(CliTest, DemoOutputs) {
	const auto out = dir_ / "demo";
	const CliResult r = run({"demo", "--hr", hr_, "--out-dir", out.string(), "--iters", "40", "--log-every", "20", "--gap", "10",
							 "--late-steps", "10", "--seed", "3"});
	ASSERT_EQ(r.code, 0) << r.err;
	for (const char* f : {"series_ldl.csv", "series_baseline.csv", "mad_ldl.csv", "summary.json", "snapshots_ldl/step_0000000.png",
						  "snapshots_ldl/step_0000040.png", "snapshots_baseline/step_0000020.png"}) {
		EXPECT_TRUE(fs::exists(out / f)) << f;
	}
	std::istringstream is(slurp(out / "series_ldl.csv"));
	std::string header;
	std::getline(is, header);
	EXPECT_EQ(header, "k,l1,artifact,combined,map_mean,mad_ema");
	const auto summary = json_of(slurp(out / "summary.json"));
	EXPECT_EQ(summary["baseline"]["beta"].get<double>(), 0.0);
	EXPECT_EQ(summary["ldl"]["beta"].get<double>(), 1.0);
}

TEST_F(CliTest, ClassifyTypeC) {
	// Residual of ±s everywhere with s² = 0.67^5 gives σ = 0.67.
	const double s = std::sqrt(std::pow(0.67, 5.0));
	Image hr(32, 32, 1, 0.5);
	Image sr(32, 32, 1);
	for (std::size_t y = 0; y < 32; ++y) {
		for (std::size_t x = 0; x < 32; ++x) { sr(y, x) = (x + y) % 2 == 0 ? 0.5 + s : 0.5 - s; }
	}
	save_png(hr, dir_ / "c_hr.png");
	save_png(sr, dir_ / "c_sr.png");
	const CliResult r = run({"classify", "--hr", (dir_ / "c_hr.png").string(), "--sr", (dir_ / "c_sr.png").string()});
	ASSERT_EQ(r.code, 0) << r.err;
	const auto j = json_of(r.out);
	EXPECT_NEAR(j["sigma"].get<double>(), 0.67, 0.005);
	EXPECT_EQ(j["label"], "C");
}

TEST_F(CliTest, ConfigFileUnderExplicitFlags) {
	const auto cfg = dir_ / "cfg.json";
	std::ofstream(cfg) << R"({"beta": 0.0, "reduction": "sum", "lambda1": 2})";
	const auto base = run({"loss", "--hr", hr_, "--sr", sr_, "--config", cfg.string()});
	ASSERT_EQ(base.code, 0) << base.err;
	auto j = json_of(base.out);
	EXPECT_EQ(j["beta"].get<double>(), 0.0);
	EXPECT_EQ(j["lambda1"].get<double>(), 2.0);
	EXPECT_EQ(j["reduction"], "sum");

	const auto over = run({"loss", "--hr", hr_, "--sr", sr_, "--config", cfg.string(), "--beta", "3"});
	ASSERT_EQ(over.code, 0) << over.err;
	j = json_of(over.out);
	EXPECT_EQ(j["beta"].get<double>(), 3.0);
	EXPECT_EQ(j["lambda1"].get<double>(), 2.0);

	std::ofstream(dir_ / "bad.json") << R"({"no-such-flag": 1})";
	EXPECT_EQ(run({"loss", "--hr", hr_, "--sr", sr_, "--config", (dir_ / "bad.json").string()}).code, 2);
	std::ofstream(dir_ / "broken.json") << "{";
	EXPECT_EQ(run({"loss", "--hr", hr_, "--sr", sr_, "--config", (dir_ / "broken.json").string()}).code, 2);
}

TEST_F(CliTest, ExitCodes) {
	EXPECT_EQ(run({}).code, 2);
	EXPECT_EQ(run({"frobnicate"}).code, 2);
	EXPECT_EQ(run({"metrics", "--a", hr_}).code, 2);
	EXPECT_EQ(run({"metrics", "--a", hr_, "--b", hr_, "--bogus", "1"}).code, 2);
	EXPECT_EQ(run({"map", "--hr", hr_, "--sr", sr_, "--out-dir", (dir_ / "x").string(), "--n", "4"}).code, 2);

	const CliResult missing = run({"metrics", "--a", hr_, "--b", (dir_ / "nope.png").string()});
	EXPECT_EQ(missing.code, 1);
	EXPECT_NE(missing.err.find("nope.png"), std::string::npos);

	save_png(Image(16, 16, 3), dir_ / "small.png");
	EXPECT_EQ(run({"metrics", "--a", hr_, "--b", (dir_ / "small.png").string()}).code, 1);
	EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(CliTest, RerunsAreByteIdentical) {
	const auto a = dir_ / "a";
	const auto b = dir_ / "b";
	ASSERT_EQ(run({"map", "--hr", hr_, "--sr", sr_, "--sr2", sr2_, "--out-dir", a.string()}).code, 0);
	ASSERT_EQ(run({"map", "--hr", hr_, "--sr", sr_, "--sr2", sr2_, "--out-dir", b.string()}).code, 0);
	for (const char* f : {"residual.png", "m.png", "m_scaled.png", "m_refine.png", "map.json"}) { EXPECT_EQ(slurp(a / f), slurp(b / f)) << f; }
}
