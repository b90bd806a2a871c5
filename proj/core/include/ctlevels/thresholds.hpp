#pragma once

namespace ctlevels {

// Classification thresholds. tau_clear = 0 is admitted (everything Clear);
// the Transition test is unreachable in that case, so tau_trans < tau_clear
// is only enforced when it can matter.
struct ClassifyThresholds {
    double tau_clear = 0.5;
    double tau_trans = 0.15;
    double cert_low = 0.4;
    double cert_high = 0.7;

    void validate() const; // throws SchemaError on out-of-range values
};

} // namespace ctlevels
