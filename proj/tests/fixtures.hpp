#pragma once

#include <cmath>

#include "lowdim/geometry.hpp"
#include "lowdim/solvers.hpp"

namespace fixtures {

inline constexpr double kPi = 3.141592653589793;

inline lowdim::ValidatedStructure crossing_segments() {
    return lowdim::validate_structure({lowdim::make_segment(0, {-1, 0, 0}, {1, 0, 0}),
                                       lowdim::make_segment(1, {0, -1, 0}, {0, 1, 0})});
}

inline lowdim::ValidatedStructure crossing_discs() {
    return lowdim::validate_structure({lowdim::make_disc(0, {0, 0, 0}, 1.0, {0, 0, 1}),
                                       lowdim::make_disc(1, {0, 0, 0}, 1.0, {0, 1, 0})});
}

inline lowdim::ValidatedStructure disc_with_segment() {
    return lowdim::validate_structure({lowdim::make_disc(0, {0, 0, 0}, 1.0, {0, 0, 1}),
                                       lowdim::make_segment(1, {0.2, 0.1, -1}, {0.2, 0.1, 1})});
}

inline lowdim::ValidatedStructure single_segment() {
    return lowdim::validate_structure({lowdim::make_segment(0, {-1, 0, 0}, {1, 0, 0})});
}

inline lowdim::ValidatedStructure single_disc() {
    return lowdim::validate_structure({lowdim::make_disc(0, {0, 0, 0}, 1.0, {0, 0, 1})});
}

// Number of generalized eigenvalues below the kernel threshold.
int kernel_dimension(const lowdim::Discretization& d, int probe);

}  // namespace fixtures
