#pragma once

#include "codegru/config.hpp"
#include "codegru/context.hpp"
#include "codegru/corpus.hpp"
#include "codegru/errors.hpp"
#include "codegru/evaluator.hpp"
#include "codegru/grad_check.hpp"
#include "codegru/lexer.hpp"
#include "codegru/model_io.hpp"
#include "codegru/neural_lm.hpp"
#include "codegru/pipeline.hpp"
#include "codegru/regularizer.hpp"
#include "codegru/rng.hpp"
#include "codegru/sampler.hpp"
#include "codegru/suggest.hpp"
#include "codegru/trainer.hpp"
#include "codegru/vocabulary.hpp"
