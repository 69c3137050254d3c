#pragma once

#include "navkit/camera_motion.hpp"
#include "navkit/dataset_io.hpp"
#include "navkit/errors.hpp"
#include "navkit/heading_labeler.hpp"
#include "navkit/mask_augment.hpp"
#include "navkit/nav_metrics.hpp"
#include "navkit/raster.hpp"
#include "navkit/rng.hpp"
#include "navkit/route_graph.hpp"
#include "navkit/sim_world.hpp"
