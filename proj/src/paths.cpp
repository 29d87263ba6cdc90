#include "spdo/paths.hpp"

#include "spdo/errors.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace spdo {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

TimeGrid::TimeGrid(double horizon, std::size_t steps) : horizon_(horizon), steps_(steps) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InvalidArgument("time horizon must be positive");
    if (steps < 1) throw InvalidArgument("time grid needs at least one step");
}

double TimeGrid::node(std::size_t k) const noexcept {
    if (k == steps_) return horizon_;
    return horizon_ * static_cast<double>(k) / static_cast<double>(steps_);
}

std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t domain, std::uint64_t index) {
    return splitmix64(splitmix64(splitmix64(seed) ^ domain) ^ index);
}

BrownianPath sample_brownian(std::uint64_t seed, std::uint64_t path_index, const TimeGrid& time_grid) {
    std::mt19937_64 rng(derive_stream(seed, stream_domain::brownian, path_index));
    std::normal_distribution<double> normal(0.0, std::sqrt(time_grid.dt()));
    BrownianPath path{time_grid, std::vector<double>(time_grid.nodes()), seed, path_index};
    for (std::size_t k = 1; k < path.values.size(); ++k)
        path.values[k] = path.values[k - 1] + normal(rng);
    return path;
}

PathSlice::PathSlice(std::shared_ptr<const BrownianPath> path, double cutoff_time)
    : path_(std::move(path)), cutoff_(cutoff_time) {
    if (!path_) throw InvalidArgument("path slice needs a path");
    if (cutoff_time < 0.0 || cutoff_time > path_->time_grid.horizon() * (1.0 + 1e-14))
        throw InvalidArgument("path slice cutoff outside [0, T]");
}

double PathSlice::at(double s) const {
    const double slack = 1e-12 * path_->time_grid.horizon();
    if (s > cutoff_ + slack) {
        std::ostringstream msg;
        msg << "adapted rule read w(" << s << ") beyond cutoff " << cutoff_;
        throw AdaptednessViolation(msg.str());
    }
    if (s < 0.0) throw InvalidArgument("negative time");
    const auto& tg = path_->time_grid;
    auto k = static_cast<std::size_t>(std::floor(s / tg.dt() + 1e-9));
    if (k > tg.steps()) k = tg.steps();
    return path_->values[k];
}

double PathSlice::at_node(std::size_t k) const {
    const auto& tg = path_->time_grid;
    if (k > tg.steps()) throw InvalidArgument("time node out of range");
    return at(tg.node(k));
}

EvalContext deterministic_context(double t, double horizon) {
    const double h = std::max(horizon, t);
    auto path = std::make_shared<const BrownianPath>(sample_brownian(0, 0, TimeGrid(h, 1)));
    return EvalContext{t, PathSlice(std::move(path), t)};
}

Trajectory ito_process(const FieldRule& drift, const FieldRule& diffusion, const SpectralField& y0,
                       std::shared_ptr<const BrownianPath> path) {
    const TimeGrid tg = path->time_grid;
    Trajectory out{tg, {}};
    out.snapshots.reserve(tg.nodes());
    out.snapshots.push_back(y0);
    const double dt = tg.dt();
    for (std::size_t k = 0; k < tg.steps(); ++k) {
        const double t = tg.node(k);
        const PathSlice slice(path, t);
        const SpectralField& y = out.snapshots.back();
        const double dw = path->values[k + 1] - path->values[k];
        SpectralField next = y + drift(t, slice, y) * dt + diffusion(t, slice, y) * dw;
        out.snapshots.push_back(std::move(next));
    }
    return out;
}

Window sine_window(double horizon) {
    return [horizon](double t) { return std::sin(std::numbers::pi * t / horizon); };
}

Semimartingale windowed_ito_process(const FieldRule& drift, const FieldRule& diffusion,
                                    const Window& window, const SpectralField& y0,
                                    std::shared_ptr<const BrownianPath> path) {
    const TimeGrid tg = path->time_grid;
    if (std::abs(window(0.0)) > 1e-14 || std::abs(window(tg.horizon())) > 1e-14)
        throw InvalidArgument("window must vanish at t = 0 and t = T");
    Trajectory y = ito_process(drift, diffusion, y0, path);
    const auto& grid = y0.grid();
    for (std::size_t k = 0; k < tg.nodes(); ++k) {
        if (k == 0 || k == tg.steps()) {
            y.snapshots[k] = SpectralField::zero(grid);
        } else {
            y.snapshots[k] = y.snapshots[k] * window(tg.node(k));
        }
    }
    return Semimartingale{std::move(y), std::move(path)};
}

std::vector<double> realized_quadratic_variation(const Trajectory& z) {
    std::vector<double> qv;
    if (z.snapshots.size() < 2) return qv;
    qv.reserve(z.snapshots.size() - 1);
    for (std::size_t k = 0; k + 1 < z.snapshots.size(); ++k) {
        const auto a = z.snapshots[k].values();
        const auto b = z.snapshots[k + 1].values();
        double acc = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) acc += std::norm(b[j] - a[j]);
        qv.push_back(acc * z.snapshots[k].grid().cell_weight());
    }
    return qv;
}

FieldRule zero_rule() {
    return [](double, const PathSlice&, const SpectralField& y) { return SpectralField::zero(y.grid()); };
}

FieldRule constant_rule(SpectralField field) {
    return [field = std::move(field)](double, const PathSlice&, const SpectralField&) { return field; };
}

FieldRule linear_rule(cplx rate) {
    return [rate](double, const PathSlice&, const SpectralField& y) { return y * rate; };
}

}  // namespace spdo
