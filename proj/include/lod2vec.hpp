#pragma once

// Umbrella header for the lod2vec library.

#include "lod2vec/components.hpp"
#include "lod2vec/corner_nms.hpp"
#include "lod2vec/edge_vector.hpp"
#include "lod2vec/face_extract.hpp"
#include "lod2vec/geometry.hpp"
#include "lod2vec/metrics.hpp"
#include "lod2vec/model3d.hpp"
#include "lod2vec/morphology.hpp"
#include "lod2vec/parallel.hpp"
#include "lod2vec/pipeline.hpp"
#include "lod2vec/raster.hpp"
#include "lod2vec/raster_io.hpp"
#include "lod2vec/stats.hpp"
#include "lod2vec/synth.hpp"
#include "lod2vec/terrain.hpp"
