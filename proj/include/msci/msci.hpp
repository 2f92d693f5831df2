#pragma once

#include "msci/series.hpp"
#include "msci/datagen.hpp"
#include "msci/xft.hpp"
#include "msci/qmat.hpp"
#include "msci/objectives.hpp"
#include "msci/evolve.hpp"
#include "msci/genomes.hpp"
#include "msci/config.hpp"
#include "msci/theory.hpp"
#include "msci/report.hpp"
#include "msci/presets.hpp"
