#pragma once

#include "payofflab/errors.hpp"
#include "payofflab/experiments.hpp"
#include "payofflab/game.hpp"
#include "payofflab/learn.hpp"
#include "payofflab/linalg.hpp"
#include "payofflab/markov.hpp"
#include "payofflab/parallel.hpp"
#include "payofflab/payoff.hpp"
#include "payofflab/region.hpp"
#include "payofflab/report.hpp"
#include "payofflab/rng.hpp"
#include "payofflab/svg.hpp"
#include "payofflab/zd.hpp"
