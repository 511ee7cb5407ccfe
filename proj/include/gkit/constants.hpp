#pragma once

#include "gkit/errors.hpp"

namespace gkit {

/// Best published two-sided bounds for the Grothendieck constants, plus
/// the effective threshold used by membership tests.  K_G is not known
/// exactly, so nothing in the library compares against "K_G" directly;
/// every bound check uses `kg_effective`, which defaults to the real
/// upper bound and may be raised by configuration but never below the
/// real lower bound.
struct Constants {
    static constexpr double kg_real_lower = 1.67696;
    static constexpr double kg_real_upper = 1.782;
    // complex-field bounds, stored for forward compatibility; unused by
    // the real-field operations in this library
    static constexpr double kg_complex_lower = 1.33807;
    static constexpr double kg_complex_upper = 1.40491;

    double kg_effective = kg_real_upper;

    static Constants with_effective(double kg) {
        if (!(kg >= kg_real_lower))
            throw InvalidInput("kg_effective must be >= " + std::to_string(kg_real_lower) +
                               ", got " + std::to_string(kg));
        Constants c;
        c.kg_effective = kg;
        return c;
    }
};

} // namespace gkit
