#pragma once

#include "pertrans/core.hpp"
#include "pertrans/persistence.hpp"
#include "pertrans/diagram.hpp"
#include "pertrans/features.hpp"
#include "pertrans/classify.hpp"
#include "pertrans/simulate.hpp"
