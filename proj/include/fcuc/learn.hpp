#pragma once

#include "fcuc/learn/dataset.hpp"
#include "fcuc/learn/enumerate.hpp"
#include "fcuc/learn/kmeans.hpp"
#include "fcuc/learn/tobit.hpp"
