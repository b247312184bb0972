#pragma once

#include "tpm/analytics.hpp"
#include "tpm/clustering.hpp"
#include "tpm/errors.hpp"
#include "tpm/export.hpp"
#include "tpm/geodesy.hpp"
#include "tpm/ingest.hpp"
#include "tpm/matching.hpp"
#include "tpm/segmentation.hpp"
#include "tpm/synth.hpp"
