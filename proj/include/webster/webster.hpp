#pragma once

#include "webster/acoustics.hpp"
#include "webster/config.hpp"
#include "webster/ddsp.hpp"
#include "webster/errors.hpp"
#include "webster/glottal.hpp"
#include "webster/harness.hpp"
#include "webster/inverse.hpp"
#include "webster/io.hpp"
#include "webster/metrics.hpp"
#include "webster/optimize.hpp"
#include "webster/presets.hpp"
#include "webster/signal.hpp"
#include "webster/spectral.hpp"
#include "webster/synthesis.hpp"
#include "webster/wav.hpp"
