#include "asp/disassembly/actions.hpp"

#include "asp/core/error.hpp"

namespace asp::disassembly {

std::array<ActionDirection, kDirectionCount> removal_directions(const InertialProps& props) {
    geom::Mat3 axes;
    if (props.degenerate()) {
        axes = geom::Mat3::Identity();
    } else {
        axes = props.principal_axes;
    }
    std::array<ActionDirection, kDirectionCount> out;
    for (int group = 0; group < 2; ++group) { // translations first, then rotations
        for (int axis = 0; axis < 3; ++axis) {
            for (int sign = 0; sign < 2; ++sign) {
                const int slot = group * 6 + axis * 2 + sign;
                out[static_cast<std::size_t>(slot)] = {
                    (sign == 0 ? 1.0 : -1.0) * axes.col(axis), group == 1};
            }
        }
    }
    return out;
}

ActionDirection action_direction(const InertialProps& props, int direction_index) {
    if (direction_index < 1 || direction_index > kDirectionCount) {
        throw InvalidInputError("direction_index must be in [1, 12]");
    }
    return removal_directions(props)[static_cast<std::size_t>(direction_index - 1)];
}

} // namespace asp::disassembly
