#include "spgi/scene.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "spgi/rng.hpp"

namespace spgi {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kDegToRad = kPi / 180.0;

/// Cumulative open measure of the unit-period blade pattern up to chi:
/// open on [kL, kL + open_len) for every integer k.
double open_measure(double chi, double period, double open_len) {
    const double k = std::floor(chi / period);
    const double rem = chi - k * period;
    return k * open_len + std::min(rem, open_len);
}
}  // namespace

double ChopperGeometry::blade_speed_m_s() const {
    return 2.0 * kPi * rotation_frequency_hz * beam_center_radius_mm * 1e-3;
}

double ChopperGeometry::cycle_arc_um() const {
    return blade_speed_m_s() / chopping_frequency_hz() * 1e6;
}

double ChopperGeometry::opening_phase_effective() const {
    return opening_phase < 0.0 ? 0.5 - duty_cycle / 2.0 : opening_phase;
}

SceneModel SceneModel::make_static(const Grid& grid, Image mask, double cycle_frequency_hz) {
    if (mask.height != grid.height || mask.width != grid.width) {
        throw std::invalid_argument("make_static: mask does not match the grid");
    }
    if (cycle_frequency_hz <= 0.0) {
        throw std::invalid_argument("make_static: cycle frequency must be positive");
    }
    for (double v : mask.data) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw std::invalid_argument("make_static: transmission values must lie in [0, 1]");
        }
    }
    SceneModel scene;
    scene.kind_ = SceneKind::static_mask;
    scene.grid_ = grid;
    scene.cycle_frequency_hz_ = cycle_frequency_hz;
    scene.mask_ = std::move(mask);
    return scene;
}

SceneModel SceneModel::make_chopper(const Grid& grid, const ChopperGeometry& geometry) {
    if (grid.height <= 0 || grid.width <= 0) {
        throw std::invalid_argument("make_chopper: grid unset");
    }
    if (geometry.blade_count < 1) throw std::invalid_argument("make_chopper: blade_count < 1");
    if (!(geometry.duty_cycle > 0.0 && geometry.duty_cycle < 1.0)) {
        throw std::invalid_argument("make_chopper: duty cycle must be in (0, 1)");
    }
    if (geometry.rotation_frequency_hz <= 0.0 || geometry.beam_center_radius_mm <= 0.0) {
        throw std::invalid_argument("make_chopper: rotation frequency and radius must be positive");
    }
    SceneModel scene;
    scene.kind_ = SceneKind::chopper;
    scene.grid_ = grid;
    scene.cycle_frequency_hz_ = geometry.chopping_frequency_hz();
    scene.chopper_ = geometry;
    return scene;
}

SceneModel SceneModel::make_sampled(const Grid& grid, PatternStack frames,
                                    double cycle_frequency_hz) {
    if (frames.count() < 1) throw std::invalid_argument("make_sampled: empty frame stack");
    if (frames.height != grid.height || frames.width != grid.width) {
        throw std::invalid_argument("make_sampled: frames do not match the grid");
    }
    if (cycle_frequency_hz <= 0.0) {
        throw std::invalid_argument("make_sampled: cycle frequency must be positive");
    }
    for (double v : frames.data) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw std::invalid_argument("make_sampled: transmission values must lie in [0, 1]");
        }
    }
    SceneModel scene;
    scene.kind_ = SceneKind::sampled_sequence;
    scene.grid_ = grid;
    scene.cycle_frequency_hz_ = cycle_frequency_hz;
    scene.frames_ = std::move(frames);
    return scene;
}

const ChopperGeometry& SceneModel::chopper() const {
    if (kind_ != SceneKind::chopper) {
        throw std::logic_error("scene is not a chopper");
    }
    return chopper_;
}

double SceneModel::jitter_offset_deg(std::int64_t cycle) const {
    if (kind_ != SceneKind::chopper || chopper_.jitter_sigma_deg == 0.0) return 0.0;
    Rng rng = rng_stream(chopper_.jitter_seed,
                         {rng_tag::jitter, static_cast<std::uint64_t>(cycle)});
    return rng.next_gaussian() * chopper_.jitter_sigma_deg;
}

CyclePhase SceneModel::to_cycle_phase(double t_seconds, double cycle_frequency_hz) {
    if (t_seconds < 0.0) throw std::invalid_argument("time must be nonnegative");
    const double cycles = t_seconds * cycle_frequency_hz;
    double c = std::floor(cycles);
    double phase = cycles - c;
    if (phase >= 1.0) {  // guard the rounding edge
        c += 1.0;
        phase = 0.0;
    }
    return {static_cast<std::int64_t>(c), phase};
}

double SceneModel::edge_offset_um(const CyclePhase& cp, bool jitter_enabled) const {
    const ChopperGeometry& g = chopper_;
    const double arc = g.cycle_arc_um();
    double u = cp.phase;
    if (jitter_enabled && g.jitter_sigma_deg != 0.0) {
        const double dtheta = jitter_offset_deg(cp.cycle) * kDegToRad;
        u += g.beam_center_radius_mm * 1e3 * dtheta / arc;
    }
    return (u - g.opening_phase_effective()) * arc;
}

Image SceneModel::chopper_transmission(const CyclePhase& cp, bool jitter_enabled) const {
    const ChopperGeometry& g = chopper_;
    const double arc = g.cycle_arc_um();
    const double open_len = g.duty_cycle * arc;
    const double x_open = edge_offset_um(cp, jitter_enabled);
    const double base = x_open - open_len;  // chi = 0 at the trailing (closing) edge

    const double pitch = grid_.pixel_pitch_um;
    const double x_lo = -grid_.fov_width_um() / 2.0;
    const double x_hi = grid_.fov_width_um() / 2.0;

    Image img(grid_.height, grid_.width);

    // Fast path: no edge inside the FOV means the whole frame is 0 or 1 exactly.
    const double k_lo = std::ceil((x_lo - x_open) / arc - 1e-12);
    const double k_hi = std::floor((x_hi - x_open) / arc + 1e-12);
    const double kc_lo = std::ceil((x_lo - base) / arc - 1e-12);
    const double kc_hi = std::floor((x_hi - base) / arc + 1e-12);
    const bool edge_in_fov = (k_lo <= k_hi) || (kc_lo <= kc_hi);
    if (!edge_in_fov) {
        const double chi_c = -base;  // FOV center, x = 0
        const double rem = chi_c - arc * std::floor(chi_c / arc);
        const double fill = rem < open_len ? 1.0 : 0.0;
        for (double& v : img.data) v = fill;
        return img;
    }

    // Exact open-area fraction per pixel column; the edge is vertical, so the
    // fraction is one-dimensional and rows are identical.
    std::vector<double> column(grid_.width);
    for (int x = 0; x < grid_.width; ++x) {
        const double a = x_lo + x * pitch;
        const double b = a + pitch;
        const double open = open_measure(b - base, arc, open_len) -
                            open_measure(a - base, arc, open_len);
        double cov = open / pitch;
        if (cov < 0.0) cov = 0.0;
        if (cov > 1.0) cov = 1.0;
        column[x] = cov;
    }
    for (int y = 0; y < grid_.height; ++y) {
        for (int x = 0; x < grid_.width; ++x) img.at(y, x) = column[x];
    }
    return img;
}

Image SceneModel::transmission_at(const CyclePhase& cp, bool jitter_enabled) const {
    if (cp.cycle < 0) throw std::invalid_argument("transmission_at: negative cycle index");
    if (!(cp.phase >= 0.0 && cp.phase < 1.0)) {
        throw std::invalid_argument("transmission_at: phase must lie in [0, 1)");
    }
    if (grid_.height <= 0 || grid_.width <= 0) {
        throw std::logic_error("transmission_at: grid unset");
    }
    switch (kind_) {
        case SceneKind::static_mask:
            return mask_;
        case SceneKind::chopper:
            return chopper_transmission(cp, jitter_enabled);
        case SceneKind::sampled_sequence: {
            const int count = frames_.count();
            int idx = static_cast<int>(std::floor(cp.phase * count));
            if (idx >= count) idx = count - 1;
            return frames_.pattern_image(idx);
        }
    }
    throw std::logic_error("transmission_at: unknown scene kind");
}

Image SceneModel::transmission_at(double t_seconds, bool jitter_enabled) const {
    return transmission_at(to_cycle_phase(t_seconds, cycle_frequency_hz_), jitter_enabled);
}

std::optional<double> SceneModel::edge_position(const CyclePhase& cp,
                                                bool jitter_enabled) const {
    if (kind_ != SceneKind::chopper) {
        throw std::logic_error("edge_position: scene is not a chopper");
    }
    const double arc = chopper_.cycle_arc_um();
    const double open_len = chopper_.duty_cycle * arc;
    const double x_open = edge_offset_um(cp, jitter_enabled);
    const double x_lo = -grid_.fov_width_um() / 2.0;
    const double x_hi = grid_.fov_width_um() / 2.0;

    std::optional<double> best;
    auto consider = [&](double anchor) {
        for (double k = std::ceil((x_lo - anchor) / arc); ; k += 1.0) {
            const double x = anchor + k * arc;
            if (x > x_hi) break;
            if (x < x_lo) continue;
            if (!best || std::fabs(x) < std::fabs(*best)) best = x;
        }
    };
    consider(x_open);             // opening edges
    consider(x_open - open_len);  // closing edges
    return best;
}

std::optional<double> SceneModel::edge_position(double t_seconds, bool jitter_enabled) const {
    return edge_position(to_cycle_phase(t_seconds, cycle_frequency_hz_), jitter_enabled);
}

}  // namespace spgi
