#pragma once

#include "cardioflow/anatomy.hpp"
#include "cardioflow/case_pipeline.hpp"
#include "cardioflow/category.hpp"
#include "cardioflow/classifier.hpp"
#include "cardioflow/errors.hpp"
#include "cardioflow/features.hpp"
#include "cardioflow/flow_estimate.hpp"
#include "cardioflow/flow_field.hpp"
#include "cardioflow/flow_loss.hpp"
#include "cardioflow/grid.hpp"
#include "cardioflow/io.hpp"
#include "cardioflow/motion_features.hpp"
#include "cardioflow/parallel.hpp"
#include "cardioflow/phantom.hpp"
#include "cardioflow/report.hpp"
#include "cardioflow/shape_features.hpp"
