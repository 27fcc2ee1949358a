#pragma once

#include "core.hpp"
#include "specfun.hpp"
#include "quadrature.hpp"
#include "symplectic.hpp"
#include "hagedorn.hpp"
#include "fft.hpp"
#include "phasespace.hpp"
#include "reinhardt.hpp"
#include "eigenvalues.hpp"
#include "opmatrix.hpp"
#include "io.hpp"
