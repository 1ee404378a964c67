#pragma once

#include "degroot/accuracy_metrics.hpp"
#include "degroot/dynamics.hpp"
#include "degroot/empirical.hpp"
#include "degroot/influence_network.hpp"
#include "degroot/synthetic.hpp"
#include "degroot/verify.hpp"
