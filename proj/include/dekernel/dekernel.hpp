#pragma once

#include "dekernel/asymptotics.hpp"
#include "dekernel/bandwidth.hpp"
#include "dekernel/dataset.hpp"
#include "dekernel/de_fit.hpp"
#include "dekernel/error.hpp"
#include "dekernel/estimator.hpp"
#include "dekernel/growth_model.hpp"
#include "dekernel/inference.hpp"
#include "dekernel/kernel.hpp"
#include "dekernel/local_poly.hpp"
#include "dekernel/parallel.hpp"
#include "dekernel/simlab.hpp"
#include "dekernel/version.hpp"
