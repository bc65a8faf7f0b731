#pragma once

#include "hbf/channel.hpp"
#include "hbf/driver.hpp"
#include "hbf/harness.hpp"
#include "hbf/linalg.hpp"
#include "hbf/manifold.hpp"
#include "hbf/matrix_io.hpp"
#include "hbf/mmse.hpp"
#include "hbf/plot.hpp"
#include "hbf/rng.hpp"
#include "hbf/spectral.hpp"
#include "hbf/types.hpp"
