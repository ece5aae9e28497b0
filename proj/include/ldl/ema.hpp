#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ldl/image.hpp"

namespace ldl {

/// Exponential moving average of a flat parameter vector:
/// ema ← α·ema + (1−α)·current. Starts from a copy of the initial
/// parameters; no bias correction.
class EmaState {
  public:
	EmaState() = default;

	EmaState(std::vector<double> initial, double alpha) : params_(std::move(initial)), alpha_(alpha) {
		if (!(alpha >= 0.0 && alpha <= 1.0)) { throw ConfigError("EmaState: alpha must lie in [0,1]"); }
		for (double v : params_) {
			if (!std::isfinite(v)) { throw ConfigError("EmaState: parameters must be finite"); }
		}
	}

	[[nodiscard]] std::span<const double> params() const noexcept { return params_; }
	[[nodiscard]] const std::vector<double>& values() const noexcept { return params_; }
	[[nodiscard]] double alpha() const noexcept { return alpha_; }
	[[nodiscard]] std::uint64_t step() const noexcept { return step_; }
	[[nodiscard]] std::size_t size() const noexcept { return params_.size(); }

	void update(std::span<const double> current) {
		if (current.size() != params_.size()) {
			throw ShapeError("EmaState::update: length " + std::to_string(current.size()) + " does not match " +
							 std::to_string(params_.size()));
		}
		const double take = 1.0 - alpha_;
		for (std::size_t i = 0; i < params_.size(); ++i) {
			const double prev = params_[i];
			const double cur = current[i];
			if (alpha_ == 0.0) {
				params_[i] = cur;
				continue;
			}
			// Increment form: identical inputs leave the average bit-exact.
			const double next = prev + take * (cur - prev);
			params_[i] = std::clamp(next, std::min(prev, cur), std::max(prev, cur));
		}
		++step_;
	}

	friend bool operator==(const EmaState&, const EmaState&) = default;

  private:
	std::vector<double> params_;
	double alpha_ = 0.999;
	std::uint64_t step_ = 0;
};

inline EmaState ema_init(std::vector<double> initial, double alpha = 0.999) { return EmaState(std::move(initial), alpha); }

[[nodiscard]] inline EmaState ema_update(EmaState state, std::span<const double> current) {
	state.update(current);
	return state;
}

} // namespace ldl
