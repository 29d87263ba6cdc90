#pragma once

#include "spdo/grid.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace spdo {

/// Uniform grid t_k = kT/K on [0, T].
class TimeGrid {
public:
    static constexpr std::size_t kDefaultSteps = 512;

    TimeGrid(double horizon, std::size_t steps = kDefaultSteps);

    double horizon() const noexcept { return horizon_; }
    std::size_t steps() const noexcept { return steps_; }
    std::size_t nodes() const noexcept { return steps_ + 1; }
    double dt() const noexcept { return horizon_ / static_cast<double>(steps_); }
    /// Exact endpoints: node(0) = 0 and node(K) = T.
    double node(std::size_t k) const noexcept;

private:
    double horizon_;
    std::size_t steps_;
};

/// Stable 64-bit stream key from a global seed, a domain tag and an index.
/// Every random consumer derives its generator through this function.
std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t domain, std::uint64_t index);

namespace stream_domain {
inline constexpr std::uint64_t brownian = 1;
inline constexpr std::uint64_t test_fields = 2;
inline constexpr std::uint64_t samples = 3;
}  // namespace stream_domain

/// Sampled standard Brownian motion on a TimeGrid.
struct BrownianPath {
    TimeGrid time_grid;
    std::vector<double> values;  // w(t_k), values[0] == 0
    std::uint64_t seed = 0;
    std::uint64_t path_index = 0;
};

/// Deterministic in (seed, path_index): increments are N(0, T/K) draws from
/// the stream derive_stream(seed, brownian, path_index).
BrownianPath sample_brownian(std::uint64_t seed, std::uint64_t path_index, const TimeGrid& time_grid);

/// Causal view of a Brownian path: w(s) is readable only for s ≤ cutoff.
class PathSlice {
public:
    PathSlice(std::shared_ptr<const BrownianPath> path, double cutoff_time);

    double cutoff_time() const noexcept { return cutoff_; }
    /// w(s), piecewise constant from the left node so that only nodes t_k ≤ s
    /// are consulted. Throws AdaptednessViolation for s > cutoff.
    double at(double s) const;
    double at_node(std::size_t k) const;
    double current() const { return at(cutoff_); }
    const BrownianPath& underlying_for_reporting() const noexcept { return *path_; }
    const std::shared_ptr<const BrownianPath>& shared() const noexcept { return path_; }

private:
    std::shared_ptr<const BrownianPath> path_;
    double cutoff_;
};

/// A frozen (t, ω) at which symbols and operators are evaluated.
struct EvalContext {
    double t;
    PathSlice path;
};

/// Context for deterministic evaluation: a one-step path drawn from seed 0,
/// truncated at t. Deterministic rules never read it.
EvalContext deterministic_context(double t = 0.0, double horizon = 1.0);

/// Adapted evaluation rule for the drift or diffusion of dY = f dt + g dw.
using FieldRule =
    std::function<SpectralField(double t, const PathSlice& path, const SpectralField& y)>;

struct Trajectory {
    TimeGrid time_grid;
    std::vector<SpectralField> snapshots;  // one per time node
};

/// Windowed Itô process z = η·Y with z(0) = z(T) = 0 exactly.
struct Semimartingale {
    Trajectory z;
    std::shared_ptr<const BrownianPath> path;
};

/// Euler–Maruyama for dY = f dt + g dw, Y(0) = y0, with f and g evaluated at
/// the left node on the slice cut at that node.
Trajectory ito_process(const FieldRule& drift, const FieldRule& diffusion, const SpectralField& y0,
                       std::shared_ptr<const BrownianPath> path);

using Window = std::function<double(double t)>;

/// η(t) = sin(πt/T).
Window sine_window(double horizon);

/// z(t_k) = η(t_k)·Y(t_k); rejects windows with |η(0)| or |η(T)| above 1e-14.
Semimartingale windowed_ito_process(const FieldRule& drift, const FieldRule& diffusion,
                                    const Window& window, const SpectralField& y0,
                                    std::shared_ptr<const BrownianPath> path);

/// Per-step realized quadratic variation ‖z(t_{k+1}) − z(t_k)‖²_{L²}; length K.
std::vector<double> realized_quadratic_variation(const Trajectory& z);

FieldRule zero_rule();
/// Rule returning a fixed field regardless of state (additive noise / forcing).
FieldRule constant_rule(SpectralField field);
/// y ↦ c·y.
FieldRule linear_rule(cplx rate);

}  // namespace spdo
