#pragma once

#include <cmath>
#include <string>

#include "intake/errors.hpp"

namespace intake {

// Mixing weights for the three coverage-probability signals (semantic,
// assessor, keyword). Must sum to 1.
struct MixtureWeights {
    double alpha = 1.0 / 3.0;
    double beta = 1.0 / 3.0;
    double gamma = 1.0 / 3.0;

    void validate() const {
        if (alpha < 0 || beta < 0 || gamma < 0 ||
            std::abs(alpha + beta + gamma - 1.0) > 1e-9) {
            throw ConfigError("mixture weights must be nonnegative and sum to 1");
        }
    }
};

// Probabilities are kept away from 0 and 1 so per-entity entropy never hits
// a degenerate certainty.
struct ClipBounds {
    double p_min = 0.05;
    double p_max = 0.95;

    void validate() const {
        if (!(p_min > 0.0) || !(p_max < 1.0) || !(p_min < p_max)) {
            throw ConfigError("clip bounds must satisfy 0 < p_min < p_max < 1");
        }
    }
};

// One entity's signal components and the resulting mixed, clipped p(e|a).
struct SignalBreakdown {
    double sem = 0.0;
    double llm = 0.0;
    double key = 0.0;
    double p = 0.0;
};

inline double clamp01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

inline double mix_and_clip(double sem, double llm, double key,
                           const MixtureWeights& w, const ClipBounds& clip) {
    w.validate();
    clip.validate();
    const double p = w.alpha * sem + w.beta * llm + w.gamma * key;
    return p < clip.p_min ? clip.p_min : (p > clip.p_max ? clip.p_max : p);
}

} // namespace intake
