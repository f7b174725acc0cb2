#pragma once

#include "glab/solver/direct.hpp"
#include "glab/solver/implicit.hpp"
#include "glab/solver/lifted.hpp"
#include "glab/solver/pexpansion.hpp"
#include "glab/solver/poincare.hpp"
#include "glab/solver/reduce.hpp"
