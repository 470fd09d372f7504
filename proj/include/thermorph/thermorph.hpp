#ifndef THERMORPH_THERMORPH_HPP
#define THERMORPH_THERMORPH_HPP

#include "thermorph/background.hpp"
#include "thermorph/config.hpp"
#include "thermorph/error.hpp"
#include "thermorph/grid.hpp"
#include "thermorph/gridio.hpp"
#include "thermorph/label_mask.hpp"
#include "thermorph/morphology.hpp"
#include "thermorph/segment.hpp"
#include "thermorph/synthgen.hpp"

#endif  // THERMORPH_THERMORPH_HPP
