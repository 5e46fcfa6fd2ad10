#pragma once

#include "etvo/alignment.hpp"
#include "etvo/channel.hpp"
#include "etvo/csv.hpp"
#include "etvo/dtw.hpp"
#include "etvo/error.hpp"
#include "etvo/metrics.hpp"
#include "etvo/oracle.hpp"
#include "etvo/signal.hpp"
