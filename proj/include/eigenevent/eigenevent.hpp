#pragma once

#include "eigenevent/baseline.hpp"
#include "eigenevent/detector.hpp"
#include "eigenevent/error.hpp"
#include "eigenevent/evaluation.hpp"
#include "eigenevent/io.hpp"
#include "eigenevent/schema.hpp"
#include "eigenevent/simulator.hpp"
#include "eigenevent/tensor.hpp"
