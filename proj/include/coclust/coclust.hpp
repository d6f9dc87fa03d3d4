#pragma once

#include "coclust/bem.hpp"
#include "coclust/densities.hpp"
#include "coclust/influence.hpp"
#include "coclust/oracle.hpp"
#include "coclust/selection.hpp"
#include "coclust/simulate.hpp"
#include "coclust/types.hpp"
