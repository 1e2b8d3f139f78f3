#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "spgi/scene.hpp"

using namespace spgi;

namespace {

ChopperGeometry paper_geometry() {
    ChopperGeometry g;
    g.blade_count = 10;
    g.duty_cycle = 0.5;
    g.rotation_frequency_hz = 20.0;  // 200 Hz chopping
    g.beam_center_radius_mm = 4.8;
    g.jitter_sigma_deg = 0.0;
    return g;
}

}  // namespace

TEST_CASE("blade speed and cycle arc at the default geometry") {
    const ChopperGeometry g = paper_geometry();
    CHECK(g.chopping_frequency_hz() == doctest::Approx(200.0));
    // 2 pi * 20 Hz * 4.8 mm = 0.603 m/s
    CHECK(g.blade_speed_m_s() == doctest::Approx(0.603).epsilon(0.01));
    CHECK(g.cycle_arc_um() == doctest::Approx(3015.9).epsilon(0.01));
}

TEST_CASE("fully closed and fully open phases give exact 0 and 1 frames") {
    const Grid grid{16, 16, 6.5};
    const SceneModel scene = SceneModel::make_chopper(grid, paper_geometry());
    // opening edge crosses center at phase 0.25; FOV is tiny vs the cycle arc
    const Image closed = scene.transmission_at(CyclePhase{0, 0.0}, false);
    for (double v : closed.data) CHECK(v == 0.0);
    const Image open = scene.transmission_at(CyclePhase{0, 0.5}, false);
    for (double v : open.data) CHECK(v == 1.0);
}

TEST_CASE("edge bisecting the FOV gives mean transmission one half") {
    const Grid grid{32, 32, 6.5};
    const SceneModel scene = SceneModel::make_chopper(grid, paper_geometry());
    // phase 0.25 puts the opening edge exactly at the FOV center
    const Image img = scene.transmission_at(CyclePhase{0, 0.25}, false);
    double mean = 0.0;
    for (double v : img.data) mean += v;
    mean /= static_cast<double>(img.data.size());
    CHECK(std::fabs(mean - 0.5) <= 1.0 / (2.0 * 32));

    // analytic half-plane oracle: column open fraction is 1 left of center,
    // 0 right of center, split across the two middle columns
    for (int y = 0; y < grid.height; ++y) {
        CHECK(img.at(y, 0) == 1.0);
        CHECK(img.at(y, grid.width - 1) == 0.0);
    }
}

TEST_CASE("edge position hits the stated examples") {
    const Grid grid{92, 92, 6.5};
    const SceneModel scene = SceneModel::make_chopper(grid, paper_geometry());

    const auto centered = scene.edge_position(CyclePhase{0, 0.25}, false);
    REQUIRE(centered.has_value());
    CHECK(*centered == doctest::Approx(0.0).scale(1.0));

    // 10 us at 0.6 m/s moves the edge about 6 um (one pixel)
    const double f_chop = scene.chopping_frequency_hz();
    const double dphase = 10e-6 * f_chop;
    const auto moved = scene.edge_position(CyclePhase{0, 0.25 + dphase}, false);
    REQUIRE(moved.has_value());
    CHECK(*moved - *centered == doctest::Approx(6.03).epsilon(0.01));

    // fully open: no edge in view
    CHECK_FALSE(scene.edge_position(CyclePhase{0, 0.5}, false).has_value());
}

TEST_CASE("edge displacement rate equals the blade tangential speed") {
    const Grid grid{64, 64, 6.5};
    const ChopperGeometry g = paper_geometry();
    const SceneModel scene = SceneModel::make_chopper(grid, g);
    const double du = 1e-5;
    const auto p0 = scene.edge_position(CyclePhase{0, 0.25 - du}, false);
    const auto p1 = scene.edge_position(CyclePhase{0, 0.25 + du}, false);
    REQUIRE(p0.has_value());
    REQUIRE(p1.has_value());
    const double dt = 2.0 * du / g.chopping_frequency_hz();
    const double rate_m_s = (*p1 - *p0) * 1e-6 / dt;
    CHECK(rate_m_s == doctest::Approx(g.blade_speed_m_s()).epsilon(0.01));
}

TEST_CASE("periodicity is bit exact with jitter disabled") {
    const Grid grid{24, 24, 6.5};
    const SceneModel scene = SceneModel::make_chopper(grid, paper_geometry());
    for (double phase : {0.1, 0.2493, 0.25, 0.2507, 0.75, 0.9}) {
        const Image a = scene.transmission_at(CyclePhase{0, phase}, false);
        const Image b = scene.transmission_at(CyclePhase{12345, phase}, false);
        CHECK(a.data == b.data);
    }
}

TEST_CASE("mean transmission is monotone while the opening edge crosses") {
    const Grid grid{48, 48, 6.5};
    const ChopperGeometry g = paper_geometry();
    const SceneModel scene = SceneModel::make_chopper(grid, g);
    const double half_span = grid.fov_width_um() / 2.0 / g.cycle_arc_um();
    double prev = -1.0;
    for (int i = 0; i <= 200; ++i) {
        const double phase = 0.25 - half_span + (2.0 * half_span * i) / 200.0;
        const Image img = scene.transmission_at(CyclePhase{0, phase}, false);
        double mean = 0.0;
        for (double v : img.data) mean += v;
        mean /= static_cast<double>(img.data.size());
        CHECK(mean >= prev);
        prev = mean;
    }
    CHECK(prev > 0.9);
}

TEST_CASE("jitter offsets reproduce per cycle and have the right spread") {
    const Grid grid{16, 16, 6.5};
    ChopperGeometry g = paper_geometry();
    g.jitter_sigma_deg = 0.2;
    g.jitter_seed = 99;
    const SceneModel scene = SceneModel::make_chopper(grid, g);

    CHECK(scene.jitter_offset_deg(7) == scene.jitter_offset_deg(7));
    CHECK(scene.jitter_offset_deg(7) != scene.jitter_offset_deg(8));

    const int m = 20000;
    double sum = 0, sum2 = 0;
    for (int c = 0; c < m; ++c) {
        const double d = scene.jitter_offset_deg(c);
        sum += d;
        sum2 += d * d;
    }
    const double mean = sum / m;
    const double sd = std::sqrt(sum2 / m - mean * mean);
    CHECK(sd == doctest::Approx(0.2).epsilon(0.05));
}

TEST_CASE("jitter shifts the edge by radius times angle") {
    const Grid grid{64, 64, 24.0};
    ChopperGeometry g = paper_geometry();
    g.jitter_sigma_deg = 0.2;
    g.jitter_seed = 5;
    const SceneModel scene = SceneModel::make_chopper(grid, g);
    for (std::int64_t c : {0, 3, 11}) {
        const auto off = scene.edge_position(CyclePhase{c, 0.25}, false);
        const auto on = scene.edge_position(CyclePhase{c, 0.25}, true);
        REQUIRE(off.has_value());
        REQUIRE(on.has_value());
        const double expected =
            4.8e3 * scene.jitter_offset_deg(c) * 3.14159265358979323846 / 180.0;
        CHECK(*on - *off == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("static masks are time independent and validated") {
    const Grid grid{8, 8, 1.0};
    Image mask(8, 8, 0.5);
    const SceneModel scene = SceneModel::make_static(grid, mask, 100.0);
    const Image a = scene.transmission_at(0.0, false);
    const Image b = scene.transmission_at(0.0123, false);
    CHECK(a.data == b.data);
    CHECK(a.at(0, 0) == 0.5);

    Image bad(8, 8, 1.5);
    CHECK_THROWS_AS(SceneModel::make_static(grid, bad, 100.0), std::invalid_argument);
}

TEST_CASE("sampled sequences play back frames by phase") {
    const Grid grid{4, 4, 1.0};
    PatternStack frames;
    frames.height = 4;
    frames.width = 4;
    frames.pixel_pitch_um = 1.0;
    frames.data.assign(2 * 16, 0.0);
    for (int i = 0; i < 16; ++i) frames.data[16 + i] = 1.0;  // frame 1 all open
    const SceneModel scene = SceneModel::make_sampled(grid, frames, 50.0);
    CHECK(scene.transmission_at(CyclePhase{0, 0.1}, false).at(0, 0) == 0.0);
    CHECK(scene.transmission_at(CyclePhase{0, 0.9}, false).at(0, 0) == 1.0);
}

TEST_CASE("error paths") {
    const Grid grid{8, 8, 1.0};
    const SceneModel scene = SceneModel::make_chopper(grid, paper_geometry());
    CHECK_THROWS_AS(scene.transmission_at(-1.0, false), std::invalid_argument);
    CHECK_THROWS_AS(scene.transmission_at(CyclePhase{-1, 0.5}, false), std::invalid_argument);
    CHECK_THROWS_AS(scene.transmission_at(CyclePhase{0, 1.5}, false), std::invalid_argument);

    const SceneModel flat = SceneModel::make_static(grid, Image(8, 8, 1.0), 100.0);
    CHECK_THROWS_AS(flat.edge_position(0.0, false), std::logic_error);

    ChopperGeometry bad = paper_geometry();
    bad.duty_cycle = 1.5;
    CHECK_THROWS_AS(SceneModel::make_chopper(grid, bad), std::invalid_argument);
}
