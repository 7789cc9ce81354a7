#pragma once

#include "herogcn/adam.hpp"
#include "herogcn/agcn.hpp"
#include "herogcn/autoencoder.hpp"
#include "herogcn/config.hpp"
#include "herogcn/errors.hpp"
#include "herogcn/graph.hpp"
#include "herogcn/infomax.hpp"
#include "herogcn/io.hpp"
#include "herogcn/kmeans.hpp"
#include "herogcn/matrix.hpp"
#include "herogcn/metrics.hpp"
#include "herogcn/model.hpp"
#include "herogcn/ops.hpp"
#include "herogcn/selfsup.hpp"
#include "herogcn/tape.hpp"
#include "herogcn/trainer.hpp"
