#pragma once

#include <array>
#include <vector>

#include "asp/geom/inertia.hpp"

namespace asp::disassembly {

using geom::InertialProps;
using geom::Vec3;

// One removal attempt: part, direction slot and sweep magnitude. Slots 1-6
// are +/- principal-axis translations, 7-12 are +/- principal-axis screws
// (full turn plus axial escape), ordered by axis rank then sign.
struct DisassemblyAction {
    int part_id = -1;
    int direction_index = 0; // 1..12
    double magnitude = 0.0;  // escape distance in meters
};

struct ActionDirection {
    Vec3 axis = Vec3::UnitX(); // unit vector
    bool is_rotation = false;
};

constexpr int kDirectionCount = 12;

// Direction table for a part. Degenerate inertia (repeated principal
// moments) falls back to the world axes for determinism.
std::array<ActionDirection, kDirectionCount> removal_directions(const InertialProps& props);

ActionDirection action_direction(const InertialProps& props, int direction_index);

} // namespace asp::disassembly
