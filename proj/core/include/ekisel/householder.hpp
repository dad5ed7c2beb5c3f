#pragma once

#include "ekisel/types.hpp"

namespace ekisel {

// Orthogonal matrix mapping unit vector `from` onto unit vector `to`.
//
// Generic case: the reflection I - 2 w w^T across the hyperplane orthogonal
// to w = (from - to)/|from - to|.  Degenerate cases are handled
// deterministically: from ~ to returns the identity; from ~ -to returns the
// point reflection 2 w w^T - I through a vector w orthogonal to `from`
// (the first canonical basis vector with its `from` component projected out,
// falling back to the second if that direction vanishes).
Matrix reflection_mapping(const Vector& from, const Vector& to,
                          double tol = 1e-14);

}  // namespace ekisel
