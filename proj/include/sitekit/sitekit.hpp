#pragma once

#include "sitekit/analysis.hpp"
#include "sitekit/corpus_loader.hpp"
#include "sitekit/csv.hpp"
#include "sitekit/dep_convert.hpp"
#include "sitekit/entropy_exact.hpp"
#include "sitekit/errors.hpp"
#include "sitekit/estimators.hpp"
#include "sitekit/pcfg.hpp"
#include "sitekit/treebank_io.hpp"
