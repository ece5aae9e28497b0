#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <random>
#include <string>
#include <vector>

#include "ldl/artifact_map.hpp"
#include "ldl/ema.hpp"
#include "ldl/image.hpp"
#include "ldl/losses.hpp"
#include "ldl/metrics.hpp"
#include "ldl/resample.hpp"

namespace ldl {

/// Pixel-space descent on λ1·L1 + β·L_artif with an EMA twin.
struct OptimConfig {
	double learning_rate = 0.05;
	std::size_t iterations = 2000;
	LossConfig loss{};
	MapConfig map{};
	double alpha = 0.999;
	double noise_std = 0.02;
	std::uint64_t seed = 0;
	std::size_t log_every = 100;
	/// When nonzero, the run records MAD between iterates k and k+mad_gap.
	std::size_t mad_gap = 0;

	void validate() const {
		if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) { throw ConfigError("OptimConfig: learning_rate must be nonnegative"); }
		if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) { throw ConfigError("OptimConfig: noise_std must be nonnegative"); }
		if (!(alpha >= 0.0 && alpha <= 1.0)) { throw ConfigError("OptimConfig: alpha must lie in [0,1]"); }
		if (log_every == 0) { throw ConfigError("OptimConfig: log_every must be positive"); }
		loss.validate();
	}
};

/// Scalars describing iterate k, all evaluated before the update.
struct StepLog {
	std::uint64_t k = 0;
	double l1 = 0.0;
	double artifact = 0.0;
	double combined = 0.0;
	double map_mean = 0.0;
	double mad_ema = 0.0;
};

struct OptimState {
	Image current;
	EmaState ema;
	std::uint64_t step = 0;
	std::mt19937_64 rng;
	std::vector<StepLog> logs;

	[[nodiscard]] Image ema_image() const {
		return Image(current.height(), current.width(), current.channels(), ema.values());
	}
};

inline OptimState optim_init(const Image& start, const Image& hr, const OptimConfig& cfg) {
	cfg.validate();
	require_same_shape(start, hr, "optim_init");
	OptimState s;
	s.current = start;
	s.ema = EmaState(start.values(), cfg.alpha);
	s.step = 0;
	s.rng.seed(cfg.seed);
	return s;
}

/// Refined artifact map for the live iterate against the EMA twin.
inline ArtifactMap refined_map_for(const Image& hr, const Image& live, const Image& ensemble, const MapConfig& cfg) {
	const ResidualMap r1 = residual(hr, live);
	const ResidualMap r2 = residual(hr, ensemble);
	const ArtifactMap scaled = scale_map(local_variance_map(r1, cfg), global_scale(r1, cfg));
	return refine_map(scaled, r1, r2);
}

/// One iteration: build M_refine from (Ψ, Ψ_EMA), take a noisy gradient step
/// on Ψ, clamp, then fold the new Ψ into the EMA.
inline void optim_step(OptimState& state, const Image& hr, const OptimConfig& cfg) {
	require_same_shape(state.current, hr, "optim_step");
	const Image ensemble = state.ema_image();
	const ArtifactMap m = refined_map_for(hr, state.current, ensemble, cfg.map);

	const LossValues loss = evaluate_losses(hr, state.current, m, cfg.loss);
	state.logs.push_back({state.step, loss.l1, loss.artifact, loss.combined, mean_value(m), mad(state.current, ensemble)});

	ResidualMap g = loss_gradient(hr, state.current, m, cfg.loss);
	if (cfg.noise_std > 0.0) {
		std::normal_distribution<double> noise(0.0, 1.0);
		for (double& v : g.data()) { v += cfg.noise_std * noise(state.rng); }
	}
	auto psi = state.current.data();
	auto grad = g.data();
	for (std::size_t i = 0; i < psi.size(); ++i) { psi[i] -= cfg.learning_rate * grad[i]; }
	clamp01(state.current);

	state.ema.update(state.current.data());
	++state.step;
}

struct Trajectory {
	std::vector<std::uint64_t> snapshot_steps;
	std::vector<Image> snapshots;
	std::vector<StepLog> series;
	/// MAD(Ψ^(k), Ψ^(k+gap)) for every k, when OptimConfig::mad_gap > 0.
	std::vector<MadEntry> mad;
	OptimState final_state;
};

/// Run cfg.iterations steps from `start`. Snapshots are taken at step 0 and
/// every log_every steps.
inline Trajectory optim_run(const Image& start, const Image& hr, const OptimConfig& cfg) {
	Trajectory t;
	OptimState state = optim_init(start, hr, cfg);
	t.snapshot_steps.push_back(0);
	t.snapshots.push_back(state.current);

	std::deque<Image> recent;
	if (cfg.mad_gap > 0) { recent.push_back(state.current); }

	for (std::size_t i = 0; i < cfg.iterations; ++i) {
		optim_step(state, hr, cfg);
		if (state.step % cfg.log_every == 0) {
			t.snapshot_steps.push_back(state.step);
			t.snapshots.push_back(state.current);
		}
		if (cfg.mad_gap > 0) {
			recent.push_back(state.current);
			if (recent.size() > cfg.mad_gap) {
				t.mad.push_back({static_cast<std::size_t>(state.step) - cfg.mad_gap, mad(recent.front(), recent.back())});
				recent.pop_front();
			}
		}
	}
	t.series = state.logs;
	t.final_state = std::move(state);
	return t;
}

/// Mean of the MAD entries whose later iterate lies in the final `last_steps`
/// steps of a run of `iterations` steps.
inline double late_stage_mad(const std::vector<MadEntry>& entries, std::size_t gap, std::size_t iterations, std::size_t last_steps) {
	double sum = 0.0;
	std::size_t count = 0;
	const std::size_t first_late = iterations > last_steps ? iterations - last_steps + 1 : 0;
	for (const MadEntry& e : entries) {
		if (e.k + gap >= first_late) {
			sum += e.mad;
			++count;
		}
	}
	return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

/// Mean of σ·M computed from the residual between hr and `img`.
inline double scaled_map_mean(const Image& hr, const Image& img, const MapConfig& cfg) {
	const ResidualMap r = residual(hr, img);
	return mean_value(scale_map(local_variance_map(r, cfg), global_scale(r, cfg)));
}

/// Blurred starting point: bicubic down-then-up by `factor`.
inline Image default_start(const Image& hr, int factor = 4) {
	Image start = bicubic_round_trip(hr, factor);
	if (!start.same_shape(hr)) { throw ShapeError("default_start: image size must be divisible by the degradation factor"); }
	return start;
}

} // namespace ldl
