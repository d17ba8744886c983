#pragma once

#include "nclp/core_matrix.hpp"
#include "nclp/funcalc.hpp"
#include "nclp/holfn.hpp"
#include "nclp/hvnorms.hpp"
#include "nclp/lp_operator.hpp"
#include "nclp/models.hpp"
#include "nclp/rbound.hpp"
#include "nclp/sqfn.hpp"

namespace nclp
{
inline constexpr const char * version = "0.1.0";
}
