#pragma once

#include "optomech/config.hpp"
#include "optomech/constants.hpp"
#include "optomech/dynamics.hpp"
#include "optomech/entanglement.hpp"
#include "optomech/error.hpp"
#include "optomech/layout.hpp"
#include "optomech/matrix_io.hpp"
#include "optomech/param_fields.hpp"
#include "optomech/params.hpp"
#include "optomech/steady_state.hpp"
#include "optomech/sweep.hpp"
#include "optomech/version.hpp"
