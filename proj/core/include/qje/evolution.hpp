// Time-ordered propagation of the switching Hamiltonian and overlap traces
// against the instantaneous eigenbasis.

#pragma once

#include <vector>

#include "qje/protocol.hpp"
#include "qje/qutrit.hpp"

namespace qje {

struct PropagationResult {
    Mat3 unitary;
    long step_count;          // after rounding up to even
    double unitarity_defect;  // |U†U - I|_max
};

// Ordered product of midpoint-rule step unitaries exp(-i H(t_mid) dt), later
// times applied leftmost.  n_steps is rounded up to even so the tent-ramp
// kink always coincides with a step boundary.
PropagationResult propagate(const Schedule& s, long n_steps);

// propagate with step doubling (starting at n_start) until the propagator
// max-norm change drops below tol.
PropagationResult propagate_auto(const Schedule& s, long n_start = 20000, double tol = 1e-8);

struct OverlapTrace {
    std::vector<double> times;  // s, step-grid nodes
    // |<m(t)|psi(t)>|^2 against the instantaneous eigenstates, columns in
    // label order (+1, 0, -1).
    std::vector<std::array<double, 3>> overlaps;
};

// Evolve the eigenstate of H(0) carrying `initial_label` and record its
// overlaps with the instantaneous eigenbasis on the step grid.
OverlapTrace overlap_trace(const Schedule& s, int initial_label, long n_steps);

}  // namespace qje
