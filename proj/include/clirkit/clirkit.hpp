#pragma once

#include "config.hpp"
#include "corpus.hpp"
#include "eval.hpp"
#include "index.hpp"
#include "pipeline.hpp"
#include "porter.hpp"
#include "rerank.hpp"
#include "retrieval.hpp"
#include "textproc.hpp"
#include "unicode.hpp"
#include "util.hpp"
