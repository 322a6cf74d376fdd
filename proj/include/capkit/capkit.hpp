#pragma once

#include "capkit/boxeval.hpp"
#include "capkit/boxeval_io.hpp"
#include "capkit/caption.hpp"
#include "capkit/caption_io.hpp"
#include "capkit/color.hpp"
#include "capkit/edit.hpp"
#include "capkit/enrich.hpp"
#include "capkit/error.hpp"
#include "capkit/geometry.hpp"
#include "capkit/image.hpp"
#include "capkit/palette.hpp"
#include "capkit/prefstats.hpp"
#include "capkit/render.hpp"
