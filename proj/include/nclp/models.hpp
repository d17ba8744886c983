#pragma once

#include "nclp/models/clifford.hpp"
#include "nclp/models/free_group.hpp"
#include "nclp/models/martingale.hpp"
#include "nclp/models/qfock.hpp"
#include "nclp/models/schur.hpp"
