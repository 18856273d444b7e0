#pragma once

#include <complex>
#include <vector>

#include "catmouse/runner.hpp"

namespace catmouse::runner {

std::vector<Experiment> analysis_experiments();
std::vector<Experiment> lattice_experiments();
std::vector<Experiment> reflected_experiments();
std::vector<Experiment> mminf_experiments();

// Largest per-coordinate z of an empirical characteristic function value
// against its exact counterpart.
double char_function_z(const CharValue& c, std::complex<double> exact);

}  // namespace catmouse::runner
