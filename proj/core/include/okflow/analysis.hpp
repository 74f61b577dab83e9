// analysis.hpp
// Coarse structure metrics for classifying the final morphology of a run:
// interface fraction and connected-component counts of the two phases.

#pragma once

#include <string>

#include "okflow/grid.hpp"

namespace okflow {

/// Fraction of nodes with |phi| < band.
double interface_fraction(const Field& phi, double band = 0.2);

/// Connected components of {phi > threshold} (above = true) or
/// {phi < threshold} (above = false), 2*dims connectivity, honoring
/// periodic wrap when the grid is periodic.
int count_components(const Field& phi, double threshold, bool above);

enum class PatternClass { Uniform, Spots, Stripes, Mixed };

std::string to_string(PatternClass c);

struct PatternMetrics {
    PatternClass pattern = PatternClass::Uniform;
    double threshold = 0.0;        // midrange value used to split phases
    double value_range = 0.0;      // max - min
    int components_high = 0;       // components of phi > threshold
    int components_low = 0;        // components of phi < threshold
    double high_area_fraction = 0.0;
    double interface_fraction = 0.0;  // |phi| < 0.2 band
};

/// Classifies the field by thresholding at the midrange value: many small
/// minority components read as spots, balanced alternating bands as stripes.
PatternMetrics classify_pattern(const Field& phi);

}  // namespace okflow
