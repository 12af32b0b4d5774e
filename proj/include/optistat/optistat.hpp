#pragma once

#include "errors.hpp"
#include "dataset.hpp"
#include "distributions.hpp"
#include "ranking.hpp"
#include "pairwise.hpp"
#include "family.hpp"
#include "omnibus.hpp"
#include "posthoc.hpp"
#include "trend.hpp"
#include "rng.hpp"
#include "bayes.hpp"
#include "multimeasure.hpp"
#include "scoring.hpp"
#include "report.hpp"
