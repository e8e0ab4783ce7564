#pragma once

// Umbrella header. api.hpp is left out so that users who do not need the
// HTTP facade do not pull in httplib.

#include "casebook/case_memory.hpp"
#include "casebook/config.hpp"
#include "casebook/engine.hpp"
#include "casebook/error.hpp"
#include "casebook/evaluation.hpp"
#include "casebook/ingestion.hpp"
#include "casebook/personality.hpp"
#include "casebook/review.hpp"
#include "casebook/similarity.hpp"
#include "casebook/text.hpp"
