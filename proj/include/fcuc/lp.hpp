#pragma once

#include "fcuc/lp/external.hpp"
#include "fcuc/lp/lp_format.hpp"
#include "fcuc/lp/model.hpp"
#include "fcuc/lp/simplex.hpp"
