#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "spgi/image.hpp"
#include "spgi/patterns.hpp"

namespace spgi {

/// Time inside a periodic scene, split so that evaluation at the same
/// in-cycle phase is bit-identical from cycle to cycle (no seconds round trip).
struct CyclePhase {
    std::int64_t cycle = 0;
    double phase = 0.0;  // in [0, 1)
};

/// Rotating optical chopper seen by a small field of view at beam_center_radius
/// from the axis. The blade edge is treated as locally straight and moving
/// along +x at the tangential speed.
struct ChopperGeometry {
    int blade_count = 10;
    double duty_cycle = 0.5;           // open fraction of a blade period
    double rotation_frequency_hz = 20.0;
    double beam_center_radius_mm = 4.8;
    double jitter_sigma_deg = 0.0;     // per-cycle angular jitter, std-dev
    std::uint64_t jitter_seed = 0;
    /// In-cycle phase at which the opening edge crosses the FOV center.
    /// Negative = auto (centers the open window at mid-cycle).
    double opening_phase = -1.0;

    double chopping_frequency_hz() const { return blade_count * rotation_frequency_hz; }
    /// Tangential blade speed at the beam, m/s.
    double blade_speed_m_s() const;
    /// Arc length the pattern advances per chopping cycle, um.
    double cycle_arc_um() const;
    double opening_phase_effective() const;
};

enum class SceneKind { static_mask, chopper, sampled_sequence };

/// Time-dependent transmission T(x, y, t) in [0, 1] on a fixed grid.
class SceneModel {
public:
    static SceneModel make_static(const Grid& grid, Image mask, double cycle_frequency_hz);
    static SceneModel make_chopper(const Grid& grid, const ChopperGeometry& geometry);
    /// Frames of a GFPS stack played back over one cycle; values must be in [0, 1].
    static SceneModel make_sampled(const Grid& grid, PatternStack frames,
                                   double cycle_frequency_hz);

    SceneKind kind() const { return kind_; }
    const Grid& grid() const { return grid_; }
    const ChopperGeometry& chopper() const;
    double chopping_frequency_hz() const { return cycle_frequency_hz_; }
    double period_s() const { return 1.0 / cycle_frequency_hz_; }

    Image transmission_at(const CyclePhase& cp, bool jitter_enabled) const;
    Image transmission_at(double t_seconds, bool jitter_enabled) const;

    /// Signed distance (um) of the blade edge nearest the FOV center, along
    /// the motion direction; empty when no edge is inside the FOV.
    std::optional<double> edge_position(const CyclePhase& cp, bool jitter_enabled) const;
    std::optional<double> edge_position(double t_seconds, bool jitter_enabled) const;

    /// The cycle's angular jitter draw, degrees.
    double jitter_offset_deg(std::int64_t cycle) const;

    static CyclePhase to_cycle_phase(double t_seconds, double cycle_frequency_hz);

private:
    SceneModel() = default;

    Image chopper_transmission(const CyclePhase& cp, bool jitter_enabled) const;
    /// Pattern-frame offset (um) of the opening edge for the given cycle phase.
    double edge_offset_um(const CyclePhase& cp, bool jitter_enabled) const;

    SceneKind kind_ = SceneKind::static_mask;
    Grid grid_;
    double cycle_frequency_hz_ = 0.0;
    Image mask_;
    ChopperGeometry chopper_{};
    PatternStack frames_;
};

}  // namespace spgi
