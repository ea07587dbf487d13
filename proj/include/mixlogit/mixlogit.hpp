#pragma once

#include "mixlogit/bundled_specs.hpp"
#include "mixlogit/dataset.hpp"
#include "mixlogit/designsim.hpp"
#include "mixlogit/error.hpp"
#include "mixlogit/modelspec.hpp"
#include "mixlogit/mslestim.hpp"
#include "mixlogit/postfit.hpp"
#include "mixlogit/qmc.hpp"
#include "mixlogit/reference_estimates.hpp"
#include "mixlogit/report.hpp"
#include "mixlogit/simlik.hpp"
