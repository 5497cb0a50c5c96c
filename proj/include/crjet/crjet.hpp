#pragma once

#include "crjet/dual.hpp"
#include "crjet/gaussq.hpp"
#include "crjet/linalg.hpp"
#include "crjet/polynomial.hpp"
#include "crjet/series.hpp"
#include "crjet/series_ops.hpp"
#include "crjet/symbolic.hpp"
#include "crjet/meromorphic.hpp"
#include "crjet/json_io.hpp"
#include "crjet/hypersurface.hpp"
#include "crjet/jet.hpp"
#include "crjet/parametrization.hpp"
#include "crjet/automorphism.hpp"
#include "crjet/report.hpp"
