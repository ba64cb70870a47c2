#pragma once

#include "nhur/types.hpp"
#include "nhur/linalg.hpp"
#include "nhur/metric.hpp"
#include "nhur/uncertainty.hpp"
#include "nhur/fock.hpp"
#include "nhur/gamma.hpp"
