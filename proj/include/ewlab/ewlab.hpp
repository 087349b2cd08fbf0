#pragma once

#include "ewlab/error.hpp"
#include "ewlab/algebra.hpp"
#include "ewlab/seifert.hpp"
#include "ewlab/elflow.hpp"
#include "ewlab/killing.hpp"
#include "ewlab/spectral.hpp"
#include "ewlab/classify.hpp"
#include "ewlab/dirac.hpp"
#include "ewlab/reconstruct.hpp"
