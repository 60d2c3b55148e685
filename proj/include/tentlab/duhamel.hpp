#pragma once

#include <string>
#include <utility>

#include "tentlab/propagator.hpp"
#include "tentlab/tentspaces.hpp"

namespace tentlab {

/// Forward-in-time solution of u' + Lu = f with zero initial data at t = 0.
/// Sources are piecewise constant per time cell (node k holds the value on
/// [t_k, t_{k+1}); the value on (0, t_min) is taken from cell 0), and the
/// recursion u(t_{k+1}) = e^{-dt L} u(t_k) + dt phi1(dt L) f_k is exact for
/// such sources: the only error is the matrix-function approximation.
struct DuhamelSolution {
    SpaceTimeField u;
    SpaceTimeField grad_u;  // dim components
    SpaceTimeField lu;      // L applied node-wise
    SpaceTimeField source;
    std::string integrator_descriptor;
};

DuhamelSolution duhamel_L1(const PropagatorCache& cache, const SpaceTimeField& source);

/// Gradient of the Duhamel solution (identical matrix products, so equal to
/// the node-wise gradient of duhamel_L1's u to roundoff).
SpaceTimeField duhamel_Lhalf(const PropagatorCache& cache, const SpaceTimeField& source);

/// Maximal-regularity operator: v(t) = int_0^t L e^{-(t-s)L} f(s) ds by its
/// own telescoping recursion v(t_{k+1}) = E v(t_k) + (I - E) f_k, independent
/// of the L * duhamel_L1 route.
SpaceTimeField duhamel_L0(const PropagatorCache& cache, const SpaceTimeField& source);

struct TzResult {
    SpaceTimeField field;
    /// Set when no time cell lies inside (0, t/2) at any evaluation node.
    bool empty_range = false;
};

/// T_z f(t) = int over (0, t/2) of (s/t)^z K(t-s) f(s) ds, midpoint rule per
/// mesh cell fully inside the range; the straddling cell is split at t/2.
/// K is the unnormalized kernel of the family (e^{-tL}, grad e^{-tL}, L e^{-tL}).
TzResult duhamel_Tz(const PropagatorCache& cache, Family family, double z,
                    const SpaceTimeField& source);

/// (T_0 f, full operator minus T_0 f); the sum reproduces the corresponding
/// exact operator (L1 / Lhalf / L0 by family) by construction.
std::pair<SpaceTimeField, SpaceTimeField> split_regular_singular(
    const PropagatorCache& cache, Family family, const SpaceTimeField& source);

/// |<v(t), h> - <v(s), e^{-(t-s)L*} h>| for mesh nodes s < t; zero (to
/// matrix-function accuracy) when v propagates freely between s and t.
double homotopy_residual(const PropagatorCache& cache, const SpaceTimeField& v,
                         int s_node, int t_node, const Field& h);

/// |T1 + T2 - T3| / max(|T1|, |T2|, |T3|) with
///   T1 = -sum_k <u_k, phi_k - phi_{k-1}>        (discrete time derivative),
///   T2 =  sum_k dt_k <A grad ubar_k, grad phi_k> (ubar = exact cell average
///          of the piecewise-exponential solution, via phi1/phi2),
///   T3 =  sum_k dt_k <f_k, phi_k>.
/// phi is piecewise constant per cell and must vanish at the first and last node.
double weak_form_residual(const PropagatorCache& cache, const SpaceTimeField& u,
                          const SpaceTimeField& f, const CoefficientField& coeffs,
                          const SpaceTimeField& phi);

}  // namespace tentlab
