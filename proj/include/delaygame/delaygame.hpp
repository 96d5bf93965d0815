#pragma once

#include "delaygame/audit.hpp"
#include "delaygame/cicalculus.hpp"
#include "delaygame/dynamics.hpp"
#include "delaygame/errors.hpp"
#include "delaygame/example_game.hpp"
#include "delaygame/games.hpp"
#include "delaygame/hamiltonian.hpp"
#include "delaygame/history.hpp"
#include "delaygame/valuesolver.hpp"
