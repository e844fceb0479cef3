#pragma once

// Convenience header pulling in the whole library.

#include "assembly.hpp"
#include "curvature.hpp"
#include "curving.hpp"
#include "evaluation.hpp"
#include "export.hpp"
#include "harness.hpp"
#include "manufactured.hpp"
#include "mesh_generators.hpp"
#include "msh_io.hpp"
#include "solver.hpp"
#include "stability.hpp"
