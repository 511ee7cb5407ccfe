#pragma once

#include "gkit/bilinear.hpp"
#include "gkit/constants.hpp"
#include "gkit/errors.hpp"
#include "gkit/fubini.hpp"
#include "gkit/io.hpp"
#include "gkit/kernels.hpp"
#include "gkit/multilinear.hpp"
#include "gkit/parallel.hpp"
#include "gkit/rng.hpp"
#include "gkit/sdp.hpp"
#include "gkit/space.hpp"
