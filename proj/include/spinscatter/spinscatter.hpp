#pragma once

#include "spinscatter/errors.hpp"
#include "spinscatter/tolerances.hpp"
#include "spinscatter/spin_hilbert.hpp"
#include "spinscatter/scattering.hpp"
#include "spinscatter/impurity_channels.hpp"
#include "spinscatter/protocols.hpp"
#include "spinscatter/sweep.hpp"
#include "spinscatter/io.hpp"
