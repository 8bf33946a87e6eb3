#pragma once

#include "crowdloc/case_study.hpp"
#include "crowdloc/cdf_model.hpp"
#include "crowdloc/channel.hpp"
#include "crowdloc/clustering.hpp"
#include "crowdloc/errors.hpp"
#include "crowdloc/estimator.hpp"
#include "crowdloc/geometry.hpp"
#include "crowdloc/io.hpp"
#include "crowdloc/localization.hpp"
#include "crowdloc/pipeline.hpp"
#include "crowdloc/rng.hpp"
