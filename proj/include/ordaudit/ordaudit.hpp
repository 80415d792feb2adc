#pragma once

#include "ordaudit/agreement.hpp"
#include "ordaudit/audit.hpp"
#include "ordaudit/corpus.hpp"
#include "ordaudit/errors.hpp"
#include "ordaudit/grid.hpp"
#include "ordaudit/identify.hpp"
#include "ordaudit/metrics.hpp"
#include "ordaudit/rank.hpp"
#include "ordaudit/resample.hpp"
#include "ordaudit/sha256.hpp"
#include "ordaudit/stats.hpp"
#include "ordaudit/synth.hpp"
