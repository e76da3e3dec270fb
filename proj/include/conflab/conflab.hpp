#pragma once

#include "conflab/error.hpp"
#include "conflab/numerics.hpp"
#include "conflab/parallel.hpp"
#include "conflab/sphere.hpp"
#include "conflab/mobius.hpp"
#include "conflab/metric.hpp"
#include "conflab/disk.hpp"
#include "conflab/concentration.hpp"
#include "conflab/io.hpp"
#include "conflab/cli.hpp"
