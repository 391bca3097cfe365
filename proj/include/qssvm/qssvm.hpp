#pragma once

#include "qssvm/errors.hpp"
#include "qssvm/types.hpp"
#include "qssvm/dataset.hpp"
#include "qssvm/halfvec.hpp"
#include "qssvm/qp.hpp"
#include "qssvm/models.hpp"
#include "qssvm/diagnostics.hpp"
#include "qssvm/rng.hpp"
#include "qssvm/datagen.hpp"
#include "qssvm/io.hpp"
#include "qssvm/experiment.hpp"
