#pragma once

#include "bethe3/errors.hpp"
#include "bethe3/field.hpp"
#include "bethe3/params.hpp"
#include "bethe3/linalg.hpp"
#include "bethe3/oracle.hpp"
#include "bethe3/bethe.hpp"
#include "bethe3/action.hpp"
#include "bethe3/interpolation.hpp"
#include "bethe3/onshell.hpp"
#include "bethe3/scalar.hpp"
#include "bethe3/formfactor.hpp"

namespace bethe3 {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace bethe3
