#pragma once

// Umbrella header: the whole toolkit.
#include "singtens/format.hpp"
#include "singtens/random.hpp"
#include "singtens/tensor.hpp"
#include "singtens/combinatorics.hpp"
#include "singtens/linalg.hpp"
#include "singtens/system.hpp"
#include "singtens/tracker.hpp"
#include "singtens/monodromy.hpp"
#include "singtens/span.hpp"
#include "singtens/relations.hpp"
#include "singtens/io.hpp"
