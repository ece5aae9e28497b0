#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ldl/artifact_map.hpp"
#include "ldl/image.hpp"
#include "ldl/losses.hpp"
#include "ldl/metrics.hpp"
#include "ldl/optim.hpp"
#include "ldl/png_io.hpp"
#include "ldl/resample.hpp"

namespace ldl::cli {

enum ExitCode : int { kOk = 0, kRuntimeError = 1, kUsageError = 2 };

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

/// Write a text file through a sibling temporary and a rename.
inline void write_text_atomic(const fs::path& path, const std::string& text) {
	fs::path tmp = path;
	tmp += ".tmp";
	{
		std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
		if (!os) { throw IoError(path.string() + ": cannot open for writing"); }
		os << text;
		if (!os.flush()) { throw IoError(path.string() + ": write failed"); }
	}
	std::error_code ec;
	fs::rename(tmp, path, ec);
	if (ec) {
		fs::remove(tmp, ec);
		throw IoError(path.string() + ": cannot rename temporary file");
	}
}

inline std::string format_real(double v) {
	char buf[32];
	std::snprintf(buf, sizeof buf, "%.17g", v);
	return buf;
}

inline std::string series_csv(const std::vector<StepLog>& logs) {
	std::string out = "k,l1,artifact,combined,map_mean,mad_ema\n";
	for (const StepLog& s : logs) {
		out += std::to_string(s.k) + "," + format_real(s.l1) + "," + format_real(s.artifact) + "," + format_real(s.combined) + "," +
			   format_real(s.map_mean) + "," + format_real(s.mad_ema) + "\n";
	}
	return out;
}

inline std::string mad_csv(const std::vector<MadEntry>& entries) {
	std::string out = "k,mad\n";
	for (const MadEntry& e : entries) { out += std::to_string(e.k) + "," + format_real(e.mad) + "\n"; }
	return out;
}

inline Reduction parse_reduction(const std::string& s) {
	if (s == "mean") { return Reduction::mean; }
	if (s == "sum") { return Reduction::sum; }
	throw ConfigError("reduction must be 'mean' or 'sum'");
}

/// |R| rendered as an image, normalized by its maximum (1 when all zero).
inline Image abs_residual_image(const ResidualMap& r) {
	double mx = 0.0;
	for (double v : r.data()) { mx = std::max(mx, std::abs(v)); }
	const double scale = mx > 0.0 ? mx : 1.0;
	std::vector<double> values(r.size());
	for (std::size_t i = 0; i < values.size(); ++i) { values[i] = std::abs(r.data()[i]) / scale; }
	return clamped_image(r.height(), r.width(), r.channels(), std::move(values));
}

/// Map weights read from a grayscale PNG (intensity used directly).
inline ArtifactMap map_from_png(const fs::path& path) {
	const Image img = load_png(path);
	if (img.channels() != 1) { throw ShapeError(path.string() + ": map PNG must be single-channel"); }
	return ArtifactMap(img.height(), img.width(), 1, img.values());
}

namespace detail {

// Option names explicitly present on the command line.
inline bool given_on_command_line(const std::vector<std::string>& args, const std::string& name) {
	const std::string flag = "--" + name;
	return std::any_of(args.begin(), args.end(), [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

// Expand a JSON config file into flag tokens for every key not given
// explicitly. Explicit flags always win.
inline std::vector<std::string> merge_config(const std::vector<std::string>& args) {
	std::optional<std::string> config_path;
	for (std::size_t i = 0; i < args.size(); ++i) {
		if (args[i] == "--config" && i + 1 < args.size()) { config_path = args[i + 1]; }
		if (args[i].rfind("--config=", 0) == 0) { config_path = args[i].substr(9); }
	}
	if (!config_path || args.empty()) { return args; }

	std::ifstream is(*config_path);
	if (!is) { throw IoError(*config_path + ": cannot open config file"); }
	Json cfg;
	try {
		cfg = Json::parse(is);
	} catch (const Json::exception& e) { throw ConfigError(*config_path + ": invalid JSON: " + e.what()); }
	if (!cfg.is_object()) { throw ConfigError(*config_path + ": config must be a JSON object"); }

	std::vector<std::string> merged{args.front()};
	for (const auto& [key, value] : cfg.items()) {
		if (key == "config") { throw ConfigError(*config_path + ": nested config is not allowed"); }
		if (given_on_command_line(args, key)) { continue; }
		merged.push_back("--" + key);
		if (value.is_string()) {
			merged.push_back(value.get<std::string>());
		} else if (value.is_number() || value.is_boolean()) {
			merged.push_back(value.dump());
		} else {
			throw ConfigError(*config_path + ": value for '" + key + "' must be a string, number or boolean");
		}
	}
	merged.insert(merged.end(), args.begin() + 1, args.end());
	return merged;
}

} // namespace detail

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name. Returns 0 on success, 2 on usage errors, 1 on runtime errors.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
	CLI::App app{"Artifact maps, LDL losses, fidelity metrics and the pixel-space LDL demo"};
	app.name("ldl");
	app.require_subcommand(1);
	std::string config_file;

	auto add_config = [&](CLI::App* sub) { sub->add_option("--config", config_file, "JSON object of flag values; explicit flags take precedence"); };

	// map
	std::string hr_path, sr_path, sr2_path, out_dir;
	int window = 7;
	double exponent = 5.0;
	auto* map_cmd = app.add_subcommand("map", "Write residual and artifact map heatmaps plus map.json");
	map_cmd->add_option("--hr", hr_path, "Ground-truth PNG")->required();
	map_cmd->add_option("--sr", sr_path, "Super-resolved PNG")->required();
	map_cmd->add_option("--sr2", sr2_path, "Ensemble (EMA) output PNG, enables refinement");
	map_cmd->add_option("--out-dir", out_dir, "Output directory")->required();
	map_cmd->add_option("--n", window, "Local variance window (odd)")->capture_default_str();
	map_cmd->add_option("--a", exponent, "Global scale exponent")->capture_default_str();
	add_config(map_cmd);

	// loss
	std::string map_path, reduction = "mean";
	double beta = 1.0, lambda1 = 1.0;
	auto* loss_cmd = app.add_subcommand("loss", "Print L1, artifact and combined losses as JSON");
	loss_cmd->add_option("--hr", hr_path)->required();
	loss_cmd->add_option("--sr", sr_path)->required();
	auto* map_opt = loss_cmd->add_option("--map", map_path, "Grayscale PNG of map weights");
	auto* sr2_opt = loss_cmd->add_option("--sr2", sr2_path, "Ensemble output PNG; the refined map is used");
	map_opt->excludes(sr2_opt);
	loss_cmd->add_option("--beta", beta)->capture_default_str();
	loss_cmd->add_option("--lambda1", lambda1)->capture_default_str();
	loss_cmd->add_option("--reduction", reduction)->check(CLI::IsMember({"mean", "sum"}))->capture_default_str();
	loss_cmd->add_option("--n", window)->capture_default_str();
	loss_cmd->add_option("--a", exponent)->capture_default_str();
	add_config(loss_cmd);

	// metrics
	std::string a_path, b_path;
	std::size_t crop = 4;
	auto* metrics_cmd = app.add_subcommand("metrics", "Print Y-channel PSNR, SSIM and MAD as JSON");
	metrics_cmd->add_option("--a", a_path)->required();
	metrics_cmd->add_option("--b", b_path)->required();
	metrics_cmd->add_option("--crop", crop, "Border pixels removed before PSNR/SSIM")->capture_default_str();
	add_config(metrics_cmd);

	// degrade
	std::string in_path, out_path, mode;
	auto* degrade_cmd = app.add_subcommand("degrade", "Write a degraded copy of a PNG");
	degrade_cmd->add_option("--in", in_path)->required();
	degrade_cmd->add_option("--out", out_path)->required();
	degrade_cmd->add_option("--mode", mode)->required()->check(CLI::IsMember({"bicubic4", "avgpool2"}));
	add_config(degrade_cmd);

	// stability
	std::string frames_dir;
	std::size_t gap = 0;
	auto* stability_cmd = app.add_subcommand("stability", "MAD series over lexicographically sorted PNG frames");
	stability_cmd->add_option("--frames", frames_dir)->required();
	stability_cmd->add_option("--gap", gap)->required();
	stability_cmd->add_option("--out", out_path)->required();
	add_config(stability_cmd);

	// demo
	OptimConfig demo_cfg;
	double eta = demo_cfg.noise_std, lr = demo_cfg.learning_rate, alpha = demo_cfg.alpha;
	std::size_t iters = demo_cfg.iterations, log_every = demo_cfg.log_every, mad_gap = 50, late_steps = 500;
	std::uint64_t seed = 0;
	auto* demo_cmd = app.add_subcommand("demo", "Run the pixel-space optimization with and without the artifact loss");
	demo_cmd->add_option("--hr", hr_path)->required();
	demo_cmd->add_option("--out-dir", out_dir)->required();
	demo_cmd->add_option("--beta", beta)->capture_default_str();
	demo_cmd->add_option("--lambda1", lambda1)->capture_default_str();
	demo_cmd->add_option("--reduction", reduction)->check(CLI::IsMember({"mean", "sum"}))->capture_default_str();
	demo_cmd->add_option("--eta", eta, "Gradient noise standard deviation")->capture_default_str();
	demo_cmd->add_option("--lr", lr)->capture_default_str();
	demo_cmd->add_option("--iters", iters)->capture_default_str();
	demo_cmd->add_option("--seed", seed)->capture_default_str();
	demo_cmd->add_option("--alpha", alpha, "EMA decay")->capture_default_str();
	demo_cmd->add_option("--log-every", log_every, "Snapshot interval")->capture_default_str();
	demo_cmd->add_option("--gap", mad_gap, "MAD gap between iterates")->capture_default_str();
	demo_cmd->add_option("--late-steps", late_steps, "Trailing steps averaged in the summary")->capture_default_str();
	demo_cmd->add_option("--n", window)->capture_default_str();
	demo_cmd->add_option("--a", exponent)->capture_default_str();
	add_config(demo_cmd);

	// classify
	double t_ab = 0.32, t_bc = 0.53;
	auto* classify_cmd = app.add_subcommand("classify", "Print patch σ and its A/B/C label as JSON");
	classify_cmd->add_option("--hr", hr_path)->required();
	classify_cmd->add_option("--sr", sr_path)->required();
	classify_cmd->add_option("--t-ab", t_ab)->capture_default_str();
	classify_cmd->add_option("--t-bc", t_bc)->capture_default_str();
	classify_cmd->add_option("--a", exponent)->capture_default_str();
	add_config(classify_cmd);

	try {
		std::vector<std::string> tokens = detail::merge_config(args);
		std::reverse(tokens.begin(), tokens.end());
		app.parse(tokens);
	} catch (const CLI::CallForHelp&) {
		out << app.help();
		return kOk;
	} catch (const CLI::CallForAllHelp&) {
		out << app.help("", CLI::AppFormatMode::All);
		return kOk;
	} catch (const CLI::ParseError& e) {
		err << "ldl: " << e.what() << "\n";
		return kUsageError;
	} catch (const ConfigError& e) {
		err << "ldl: " << e.what() << "\n";
		return kUsageError;
	} catch (const std::exception& e) {
		err << "ldl: " << e.what() << "\n";
		return kRuntimeError;
	}

	try {
		if (*map_cmd) {
			const MapConfig cfg(window, exponent);
			const Image hr = load_png(hr_path);
			const Image sr = load_png(sr_path);
			std::optional<Image> sr2;
			if (!sr2_path.empty()) { sr2 = load_png(sr2_path); }
			const ArtifactMaps maps = build_artifact_maps(hr, sr, sr2 ? &*sr2 : nullptr, cfg);

			fs::create_directories(out_dir);
			const fs::path dir(out_dir);
			const double peak = max_element(maps.primary);
			const double shared_max = peak > 0.0 ? peak : 1.0;
			save_png(abs_residual_image(maps.residual), dir / "residual.png");
			save_png(render_heatmap(maps.primary, shared_max), dir / "m.png");
			save_png(render_heatmap(maps.scaled, shared_max), dir / "m_scaled.png");
			if (maps.refined) { save_png(render_heatmap(*maps.refined, shared_max), dir / "m_refine.png"); }

			Json report;
			report["sigma"] = maps.sigma;
			report["map_mean"] = mean_value(maps.refined ? *maps.refined : maps.scaled);
			report["label"] = std::string(to_string(classify_patch(maps.sigma)));
			write_text_atomic(dir / "map.json", report.dump(2) + "\n");
			out << report.dump() << "\n";
		} else if (*loss_cmd) {
			LossConfig lcfg{beta, lambda1, parse_reduction(reduction)};
			lcfg.validate();
			const MapConfig cfg(window, exponent);
			const Image hr = load_png(hr_path);
			const Image sr = load_png(sr_path);
			ArtifactMap m;
			if (!map_path.empty()) {
				m = map_from_png(map_path);
			} else if (!sr2_path.empty()) {
				const Image sr2 = load_png(sr2_path);
				m = *build_artifact_maps(hr, sr, &sr2, cfg).refined;
			} else {
				m = build_artifact_maps(hr, sr, nullptr, cfg).scaled;
			}
			const LossValues v = evaluate_losses(hr, sr, m, lcfg);
			Json report;
			report["l1"] = v.l1;
			report["artifact"] = v.artifact;
			report["combined"] = v.combined;
			report["reduction"] = std::string(to_string(lcfg.reduction));
			report["beta"] = lcfg.beta;
			report["lambda1"] = lcfg.lambda1;
			out << report.dump() << "\n";
		} else if (*metrics_cmd) {
			MetricConfig mcfg;
			mcfg.border_crop = crop;
			const Image a = load_png(a_path);
			const Image b = load_png(b_path);
			Json report;
			report["psnr"] = psnr_y(a, b, mcfg);
			report["ssim"] = ssim_y(a, b, mcfg);
			report["mad"] = mad(a, b);
			out << report.dump() << "\n";
		} else if (*degrade_cmd) {
			const Image img = load_png(in_path);
			const Image result = mode == "avgpool2" ? downsample_avgpool2(img) : resize_bicubic(img, 0.25);
			save_png(result, out_path);
		} else if (*stability_cmd) {
			std::vector<fs::path> files;
			for (const auto& entry : fs::directory_iterator(frames_dir)) {
				if (entry.is_regular_file() && entry.path().extension() == ".png") { files.push_back(entry.path()); }
			}
			std::sort(files.begin(), files.end(), [](const fs::path& l, const fs::path& r) { return l.filename().string() < r.filename().string(); });
			std::vector<Image> frames;
			frames.reserve(files.size());
			for (const auto& f : files) { frames.push_back(load_png(f)); }
			write_text_atomic(out_path, mad_csv(mad_series(frames, gap)));
		} else if (*demo_cmd) {
			OptimConfig cfg;
			cfg.learning_rate = lr;
			cfg.iterations = iters;
			cfg.loss = LossConfig{beta, lambda1, parse_reduction(reduction)};
			cfg.map = MapConfig(window, exponent);
			cfg.alpha = alpha;
			cfg.noise_std = eta;
			cfg.seed = seed;
			cfg.log_every = log_every;
			cfg.mad_gap = mad_gap;
			cfg.validate();
			OptimConfig baseline = cfg;
			baseline.loss.beta = 0.0;

			const Image hr = load_png(hr_path);
			const Image start = default_start(hr);
			const fs::path dir(out_dir);
			Json summary;
			summary["seed"] = seed;
			summary["iterations"] = iters;
			for (const auto& [name, run_cfg] : {std::pair<std::string, const OptimConfig*>{"ldl", &cfg}, {"baseline", &baseline}}) {
				const Trajectory t = optim_run(start, hr, *run_cfg);
				const fs::path snap_dir = dir / ("snapshots_" + name);
				fs::create_directories(snap_dir);
				for (std::size_t i = 0; i < t.snapshots.size(); ++i) {
					char file[32];
					std::snprintf(file, sizeof file, "step_%07llu.png", static_cast<unsigned long long>(t.snapshot_steps[i]));
					save_png(t.snapshots[i], snap_dir / file);
				}
				write_text_atomic(dir / ("series_" + name + ".csv"), series_csv(t.series));
				if (mad_gap > 0) { write_text_atomic(dir / ("mad_" + name + ".csv"), mad_csv(t.mad)); }
				Json entry;
				entry["beta"] = run_cfg->loss.beta;
				entry["late_mad"] = late_stage_mad(t.mad, mad_gap, iters, late_steps);
				entry["final_map_mean"] = scaled_map_mean(hr, t.final_state.current, run_cfg->map);
				entry["final_psnr"] = psnr_y(hr, t.final_state.current);
				summary[name] = entry;
			}
			write_text_atomic(dir / "summary.json", summary.dump(2) + "\n");
			out << summary.dump() << "\n";
		} else if (*classify_cmd) {
			const MapConfig cfg(7, exponent);
			const Image hr = load_png(hr_path);
			const Image sr = load_png(sr_path);
			const double sigma = global_scale(residual(hr, sr), cfg);
			Json report;
			report["sigma"] = sigma;
			report["label"] = std::string(to_string(classify_patch(sigma, PatchThresholds{t_ab, t_bc})));
			out << report.dump() << "\n";
		}
	} catch (const ConfigError& e) {
		err << "ldl: " << e.what() << "\n";
		return kUsageError;
	} catch (const std::exception& e) {
		err << "ldl: " << e.what() << "\n";
		return kRuntimeError;
	}
	return kOk;
}

} // namespace ldl::cli
