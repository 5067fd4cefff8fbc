#pragma once

#include <cnslab/sampling.hpp>

namespace testing_support {
using namespace cnslab::sampling;
} // namespace testing_support
