#pragma once

#include "qrtrig/core.hpp"
#include "qrtrig/basemap.hpp"
#include "qrtrig/dynamics.hpp"
#include "qrtrig/analysis.hpp"
#include "qrtrig/render.hpp"
#include "qrtrig/io.hpp"
