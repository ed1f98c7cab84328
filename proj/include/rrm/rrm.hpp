#pragma once

#include "rrm/corpus.hpp"
#include "rrm/error.hpp"
#include "rrm/evaluation.hpp"
#include "rrm/experiment.hpp"
#include "rrm/index.hpp"
#include "rrm/language_model.hpp"
#include "rrm/lsh.hpp"
#include "rrm/ranking.hpp"
#include "rrm/relevance_model.hpp"
#include "rrm/retrieval.hpp"
#include "rrm/sparse_vector.hpp"
#include "rrm/synthetic.hpp"
