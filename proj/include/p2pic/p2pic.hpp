#pragma once

#include "async_demo.hpp"
#include "bits.hpp"
#include "checks.hpp"
#include "distribution.hpp"
#include "error.hpp"
#include "executor.hpp"
#include "info.hpp"
#include "joint_table.hpp"
#include "measures.hpp"
#include "model.hpp"
#include "rational.hpp"
#include "report.hpp"
#include "suite.hpp"
#include "transforms.hpp"
#include "zoo.hpp"
