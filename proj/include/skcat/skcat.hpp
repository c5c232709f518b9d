#pragma once

#include "skcat/core/linalg.hpp"
#include "skcat/core/parallel.hpp"
#include "skcat/core/random.hpp"
#include "skcat/core/types.hpp"
#include "skcat/core/units.hpp"
#include "skcat/dephasing.hpp"
#include "skcat/drive.hpp"
#include "skcat/electron.hpp"
#include "skcat/phonon.hpp"
#include "skcat/relaxation.hpp"
#include "skcat/spectrum.hpp"
#include "skcat/spin.hpp"
#include "skcat/wigner.hpp"
