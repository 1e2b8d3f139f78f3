#pragma once

#include <filesystem>
#include <vector>

#include "spgi/acquisition.hpp"

namespace spgi {

/// Length-N measurement vector for one frame (one in-cycle sample index).
struct FrameMeasurements {
    int frame_index = 0;
    std::vector<double> values;
};

/// Reorder phase-locked records into per-frame vectors: frame f of
/// realization r sums record r's samples at in-cycle index f over all cycles
/// (ascending cycle order). Total counts are conserved.
std::vector<FrameMeasurements> demultiplex(const std::vector<AcquisitionRecord>& records);

/// Start time of a frame within the cycle, seconds.
double frame_time(int frame_index, double sample_rate_hz, int samples_per_cycle);

/// CSV export of one frame vector, header "realization,counts".
void export_frame_csv(const FrameMeasurements& frame, const std::filesystem::path& path);

/// GFMS container plus a frame-table extension appended after the sample
/// payload: chunk tag "FRMT", u32 F, F u64 absolute byte offsets, then per
/// frame N f64 values.
void save_gfms_with_frames(const MeasurementSet& set,
                           const std::vector<FrameMeasurements>& frames,
                           const std::filesystem::path& path);
std::vector<FrameMeasurements> load_gfms_frames(const std::filesystem::path& path);

}  // namespace spgi
