#pragma once

#include "camcf/column.hpp"
#include "camcf/dataset.hpp"
#include "camcf/error.hpp"
#include "camcf/info.hpp"
#include "camcf/io.hpp"
#include "camcf/metrics.hpp"
#include "camcf/mlknn.hpp"
#include "camcf/pipeline.hpp"
#include "camcf/protocol.hpp"
#include "camcf/report.hpp"
#include "camcf/synth.hpp"
