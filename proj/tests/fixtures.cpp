#include "fixtures.hpp"

#include "lowdim/linalg.hpp"

namespace fixtures {

int kernel_dimension(const lowdim::Discretization& d, int probe) {
    const auto pairs = lowdim::smallest_eigenpairs(d.stiffness, d.mass, probe);
    const double threshold = 1e-8 * d.stiffness.trace() / d.mass.trace();
    int count = 0;
    for (const auto& p : pairs) count += p.value < threshold ? 1 : 0;
    return count;
}

}  // namespace fixtures
