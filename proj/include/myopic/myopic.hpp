#ifndef MYOPIC_MYOPIC_HPP
#define MYOPIC_MYOPIC_HPP

#include "myopic/analysis.hpp"
#include "myopic/config.hpp"
#include "myopic/config_file.hpp"
#include "myopic/dawson.hpp"
#include "myopic/error.hpp"
#include "myopic/link_outage.hpp"
#include "myopic/markov.hpp"
#include "myopic/optimizer.hpp"
#include "myopic/parallel.hpp"
#include "myopic/quadrature.hpp"
#include "myopic/rng.hpp"
#include "myopic/simulator.hpp"
#include "myopic/state.hpp"
#include "myopic/sweep.hpp"
#include "myopic/units.hpp"

#endif  // MYOPIC_MYOPIC_HPP
