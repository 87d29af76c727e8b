#pragma once

#include "qplas/core/error.hpp"
#include "qplas/core/rng.hpp"
#include "qplas/core/types.hpp"
#include "qplas/core/wavepacket.hpp"
#include "qplas/correlator/coherence.hpp"
#include "qplas/correlator/histogram.hpp"
#include "qplas/correlator/waveform.hpp"
#include "qplas/fit/least_squares.hpp"
#include "qplas/hom/hom.hpp"
#include "qplas/hom/measurement.hpp"
#include "qplas/io/config.hpp"
#include "qplas/io/csv.hpp"
#include "qplas/io/tagfile.hpp"
#include "qplas/optics/chain.hpp"
#include "qplas/optics/experiment.hpp"
#include "qplas/optics/modulation.hpp"
#include "qplas/source/pair_source.hpp"
#include "qplas/spectrum/fano.hpp"
#include "qplas/spectrum/geometry.hpp"
#include "qplas/spectrum/permittivity.hpp"
#include "qplas/spectrum/spp.hpp"
