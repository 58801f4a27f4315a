#ifndef GROVGEN_GROVGEN_HPP
#define GROVGEN_GROVGEN_HPP

#include "grovgen/errors.hpp"
#include "grovgen/linalg.hpp"
#include "grovgen/types.hpp"
#include "grovgen/spin_ops.hpp"
#include "grovgen/grover_core.hpp"
#include "grovgen/random_unitary.hpp"
#include "grovgen/recursion_solver.hpp"
#include "grovgen/presets.hpp"
#include "grovgen/nmr_machine.hpp"
#include "grovgen/pulse_compiler.hpp"
#include "grovgen/spectra_readout.hpp"
#include "grovgen/experiment.hpp"

#endif  // GROVGEN_GROVGEN_HPP
