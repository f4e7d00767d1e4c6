#pragma once

#include "defectiva/bayes.hpp"
#include "defectiva/bdgd.hpp"
#include "defectiva/clayton.hpp"
#include "defectiva/dgompertz.hpp"
#include "defectiva/error.hpp"
#include "defectiva/io.hpp"
#include "defectiva/mle.hpp"
#include "defectiva/nonparam.hpp"
#include "defectiva/simulate.hpp"
#include "defectiva/study.hpp"

namespace defectiva {
inline constexpr const char* kVersion = "0.1.0";
}
