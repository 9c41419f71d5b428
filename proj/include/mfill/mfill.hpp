#pragma once

#include "mfill/boundary.hpp"
#include "mfill/error.hpp"
#include "mfill/filling.hpp"
#include "mfill/gallery.hpp"
#include "mfill/io.hpp"
#include "mfill/moebius.hpp"
#include "mfill/random.hpp"
#include "mfill/rough_isometry.hpp"
#include "mfill/semimetric.hpp"
