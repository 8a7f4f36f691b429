#pragma once

namespace gateseed {

// One decoded gate detection in image space.
struct GateObservation {
    double u = 0.0;           // pixel column of the gate center
    double v = 0.0;           // pixel row of the gate center
    double distance = 0.0;    // meters
    double yaw = 0.0;         // relative heading, radians
    double confidence = 0.0;  // [0, 1]
};

struct ImageDims {
    int width = 160;
    int height = 120;
};

}  // namespace gateseed
