#pragma once

#include "clustering.hpp"
#include "csv.hpp"
#include "error.hpp"
#include "filtration.hpp"
#include "geometry.hpp"
#include "persistence.hpp"
#include "pipeline.hpp"
#include "random.hpp"
#include "render.hpp"
#include "stats.hpp"
