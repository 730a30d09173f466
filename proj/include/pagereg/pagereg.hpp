#pragma once

#include "belief.hpp"
#include "cost.hpp"
#include "distribution.hpp"
#include "errors.hpp"
#include "iterate.hpp"
#include "major.hpp"
#include "model.hpp"
#include "paging.hpp"
#include "regdp.hpp"
