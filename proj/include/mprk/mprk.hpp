#ifndef MPRK_MPRK_HPP
#define MPRK_MPRK_HPP

#include "mprk/error.hpp"
#include "mprk/pds.hpp"
#include "mprk/mprk22.hpp"
#include "mprk/linear2d.hpp"
#include "mprk/stability.hpp"

#endif  // MPRK_MPRK_HPP
