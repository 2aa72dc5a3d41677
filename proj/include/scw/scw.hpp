#pragma once

#include "scw/approximate.hpp"
#include "scw/errors.hpp"
#include "scw/graph.hpp"
#include "scw/io.hpp"
#include "scw/rational.hpp"
#include "scw/realize.hpp"
#include "scw/tree.hpp"
#include "scw/weights.hpp"
#include "scw/words.hpp"
