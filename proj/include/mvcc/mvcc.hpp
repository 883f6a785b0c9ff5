#pragma once

#include "mvcc/types.hpp"
#include "mvcc/constraint_ops.hpp"
#include "mvcc/ckmeans.hpp"
#include "mvcc/propagation.hpp"
#include "mvcc/eval.hpp"
#include "mvcc/coem.hpp"
#include "mvcc/embedding.hpp"
#include "mvcc/datagen.hpp"
#include "mvcc/csv_io.hpp"
#include "mvcc/experiment.hpp"
