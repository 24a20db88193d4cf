#pragma once

#include "srd/bounds.hpp"
#include "srd/common.hpp"
#include "srd/distributions.hpp"
#include "srd/montecarlo.hpp"
#include "srd/ratefun.hpp"
#include "srd/simulate.hpp"
#include "srd/special.hpp"
#include "srd/truncation_oracle.hpp"
