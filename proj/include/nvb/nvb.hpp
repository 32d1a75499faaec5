#pragma once

#include "nvb/constants.hpp"
#include "nvb/forest.hpp"
#include "nvb/geometry.hpp"
#include "nvb/harness.hpp"
#include "nvb/initializers.hpp"
#include "nvb/lattice.hpp"
#include "nvb/mesh.hpp"
#include "nvb/mesh_io.hpp"
#include "nvb/meshes.hpp"
#include "nvb/pile_game.hpp"
#include "nvb/refine.hpp"
#include "nvb/scalar.hpp"
#include "nvb/tarray.hpp"
