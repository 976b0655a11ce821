#pragma once

#include "temq/density.hpp"
#include "temq/error.hpp"
#include "temq/experiment_config.hpp"
#include "temq/experiments.hpp"
#include "temq/histogram.hpp"
#include "temq/interval_statistics.hpp"
#include "temq/quantizers.hpp"
#include "temq/reconstruction.hpp"
#include "temq/signal_model.hpp"
#include "temq/tem_encoder.hpp"
