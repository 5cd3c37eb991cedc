#pragma once

#include "urbanrl/dqn.hpp"
#include "urbanrl/qlearning.hpp"
#include "urbanrl/replay.hpp"
#include "urbanrl/sac.hpp"
