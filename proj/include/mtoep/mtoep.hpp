#pragma once

#include "mtoep/analysis.hpp"
#include "mtoep/common.hpp"
#include "mtoep/io.hpp"
#include "mtoep/model.hpp"
#include "mtoep/norm.hpp"
#include "mtoep/operators.hpp"
#include "mtoep/parallel.hpp"
#include "mtoep/stability.hpp"
#include "mtoep/structured.hpp"
#include "mtoep/symbols.hpp"
#include "mtoep/theorems.hpp"
