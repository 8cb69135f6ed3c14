#pragma once

#include "xyconv/convertibility.hpp"
#include "xyconv/eigensolver.hpp"
#include "xyconv/entanglement.hpp"
#include "xyconv/io.hpp"
#include "xyconv/model.hpp"
#include "xyconv/scaling.hpp"
#include "xyconv/sweep.hpp"
