#pragma once

#include "retrodiction/bayes.hpp"
#include "retrodiction/bb84.hpp"
#include "retrodiction/errors.hpp"
#include "retrodiction/hilbert.hpp"
#include "retrodiction/optics.hpp"
#include "retrodiction/retrodict.hpp"
