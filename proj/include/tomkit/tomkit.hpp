#pragma once

#include "tomkit/clock.hpp"
#include "tomkit/command.hpp"
#include "tomkit/detector.hpp"
#include "tomkit/dirnet/dirx.hpp"
#include "tomkit/dirnet/iat.hpp"
#include "tomkit/dirnet/protocol.hpp"
#include "tomkit/error.hpp"
#include "tomkit/live_driver.hpp"
#include "tomkit/manager.hpp"
#include "tomkit/message.hpp"
#include "tomkit/sim/figure.hpp"
#include "tomkit/sim/network.hpp"
#include "tomkit/sim/runner.hpp"
#include "tomkit/sim/scenario.hpp"
#include "tomkit/timeout.hpp"
#include "tomkit/timeout_list.hpp"
#include "tomkit/trace.hpp"
