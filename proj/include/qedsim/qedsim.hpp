#pragma once

#include "qedsim/circuit_io.hpp"
#include "qedsim/engine.hpp"
#include "qedsim/equivalence.hpp"
#include "qedsim/error.hpp"
#include "qedsim/gates.hpp"
#include "qedsim/qutrit.hpp"
#include "qedsim/state.hpp"
