#pragma once

#include <cmath>
#include <cstddef>
#include <string_view>

#include "ldl/image.hpp"

namespace ldl {

enum class Reduction { mean, sum };

constexpr std::string_view to_string(Reduction r) noexcept { return r == Reduction::mean ? "mean" : "sum"; }

/// Weights of the reconstruction and artifact terms.
struct LossConfig {
	double beta = 1.0;
	double lambda1 = 1.0;
	Reduction reduction = Reduction::mean;

	void validate() const {
		if (!(beta >= 0.0) || !std::isfinite(beta)) { throw ConfigError("LossConfig: beta must be finite and nonnegative"); }
		if (!(lambda1 >= 0.0) || !std::isfinite(lambda1)) { throw ConfigError("LossConfig: lambda1 must be finite and nonnegative"); }
	}
};

namespace detail {

inline double reduce(double sum, std::size_t count, Reduction r) noexcept {
	return r == Reduction::mean ? sum / static_cast<double>(count) : sum;
}

inline void require_map_for(const Image& img, const ArtifactMap& m, const char* what) { require_same_extent(img, m, what); }

} // namespace detail

inline double l1_loss(const Image& hr, const Image& sr, Reduction reduction = Reduction::mean) {
	require_same_shape(hr, sr, "l1_loss");
	auto a = hr.data();
	auto b = sr.data();
	double sum = 0.0;
	for (std::size_t i = 0; i < a.size(); ++i) { sum += std::abs(a[i] - b[i]); }
	return detail::reduce(sum, a.size(), reduction);
}

/// Map-weighted L1: Σ m(i,j)·|hr − sr| with the map broadcast over channels.
inline double artifact_loss(const Image& hr, const Image& sr, const ArtifactMap& m, Reduction reduction = Reduction::mean) {
	require_same_shape(hr, sr, "artifact_loss");
	detail::require_map_for(hr, m, "artifact_loss");
	const std::size_t c = hr.channels();
	auto a = hr.data();
	auto b = sr.data();
	auto w = m.data();
	double sum = 0.0;
	for (std::size_t p = 0; p < w.size(); ++p) {
		for (std::size_t k = 0; k < c; ++k) { sum += w[p] * std::abs(a[p * c + k] - b[p * c + k]); }
	}
	return detail::reduce(sum, a.size(), reduction);
}

/// λ1·L1 + β·L_artif.
inline double combined_loss(const Image& hr, const Image& sr, const ArtifactMap& m, const LossConfig& cfg = LossConfig{}) {
	cfg.validate();
	return cfg.lambda1 * l1_loss(hr, sr, cfg.reduction) + cfg.beta * artifact_loss(hr, sr, m, cfg.reduction);
}

/// All three loss values from one evaluation.
struct LossValues {
	double l1 = 0.0;
	double artifact = 0.0;
	double combined = 0.0;
};

inline LossValues evaluate_losses(const Image& hr, const Image& sr, const ArtifactMap& m, const LossConfig& cfg = LossConfig{}) {
	cfg.validate();
	LossValues v;
	v.l1 = l1_loss(hr, sr, cfg.reduction);
	v.artifact = artifact_loss(hr, sr, m, cfg.reduction);
	v.combined = cfg.lambda1 * v.l1 + cfg.beta * v.artifact;
	return v;
}

constexpr double sign_of(double v) noexcept { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

/// d(combined_loss)/d(sr) with the map held constant:
/// −(λ1 + β·m)·sign(hr − sr), divided by the element count under mean reduction.
/// Returned as a residual-typed grid because gradients are signed.
inline ResidualMap loss_gradient(const Image& hr, const Image& sr, const ArtifactMap& m, const LossConfig& cfg = LossConfig{}) {
	cfg.validate();
	require_same_shape(hr, sr, "loss_gradient");
	detail::require_map_for(hr, m, "loss_gradient");
	const std::size_t c = hr.channels();
	const double norm = cfg.reduction == Reduction::mean ? 1.0 / static_cast<double>(hr.size()) : 1.0;
	ResidualMap g(hr.height(), hr.width(), c);
	auto a = hr.data();
	auto b = sr.data();
	auto w = m.data();
	auto out = g.data();
	for (std::size_t p = 0; p < w.size(); ++p) {
		const double weight = cfg.lambda1 + cfg.beta * w[p];
		for (std::size_t k = 0; k < c; ++k) {
			const std::size_t i = p * c + k;
			out[i] = -weight * sign_of(a[i] - b[i]) * norm;
		}
	}
	return g;
}

} // namespace ldl
