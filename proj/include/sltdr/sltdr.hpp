#pragma once

#include "sltdr/random.hpp"
#include "sltdr/lfsr.hpp"
#include "sltdr/stochastic.hpp"
#include "sltdr/bernstein.hpp"
#include "sltdr/tdr.hpp"
#include "sltdr/readout.hpp"
#include "sltdr/capacity.hpp"
#include "sltdr/benchmarks.hpp"
#include "sltdr/csv.hpp"
#include "sltdr/parallel.hpp"
#include "sltdr/experiment.hpp"
