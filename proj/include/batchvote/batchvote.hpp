#pragma once
// Convenience include for the whole library.

#include "batchvote/binom.hpp"
#include "batchvote/greedy.hpp"
#include "batchvote/ic.hpp"
#include "batchvote/oracle.hpp"
#include "batchvote/rational.hpp"
#include "batchvote/rng.hpp"
#include "batchvote/seq.hpp"
#include "batchvote/sweep.hpp"
#include "batchvote/types.hpp"
#include "batchvote/verify.hpp"
