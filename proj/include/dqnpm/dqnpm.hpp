#pragma once

#include "dqnpm/action_space.hpp"
#include "dqnpm/baselines.hpp"
#include "dqnpm/checkpoint.hpp"
#include "dqnpm/cli.hpp"
#include "dqnpm/config.hpp"
#include "dqnpm/environment.hpp"
#include "dqnpm/error.hpp"
#include "dqnpm/market_data.hpp"
#include "dqnpm/metrics.hpp"
#include "dqnpm/qnet.hpp"
#include "dqnpm/random.hpp"
#include "dqnpm/replay.hpp"
#include "dqnpm/tensorize.hpp"
#include "dqnpm/trainer.hpp"
