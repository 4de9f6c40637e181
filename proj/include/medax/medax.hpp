#pragma once

#include "medax/geometry.hpp"      // IWYU pragma: export
#include "medax/rng.hpp"           // IWYU pragma: export
#include "medax/configuration.hpp" // IWYU pragma: export
#include "medax/certificate.hpp"   // IWYU pragma: export
#include "medax/kd_tree.hpp"       // IWYU pragma: export
#include "medax/shapes.hpp"        // IWYU pragma: export
#include "medax/extractor.hpp"     // IWYU pragma: export
#include "medax/analysis.hpp"      // IWYU pragma: export
#include "medax/io.hpp"            // IWYU pragma: export
#include "medax/commands.hpp"      // IWYU pragma: export
