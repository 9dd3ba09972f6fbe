#pragma once

#include <span>

#include "iebsm/core.hpp"

namespace iebsm::learners {

// Most frequent label; ties go to the lowest class index, an empty cache
// yields class 0.
ClassIndex majority_class(std::span<const ClassIndex> labels, std::size_t n_classes);

}  // namespace iebsm::learners
