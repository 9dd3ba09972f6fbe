#pragma once

#include "iebsm/learners/cart.hpp"
#include "iebsm/learners/factory.hpp"
#include "iebsm/learners/gaussian_nb.hpp"
#include "iebsm/learners/hoeffding_tree.hpp"
#include "iebsm/learners/logistic.hpp"
#include "iebsm/learners/majority.hpp"
#include "iebsm/learners/random_forest.hpp"
