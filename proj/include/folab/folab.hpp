#pragma once

#include "canned.hpp"
#include "encode.hpp"
#include "error.hpp"
#include "eval.hpp"
#include "formula.hpp"
#include "generators.hpp"
#include "json_out.hpp"
#include "lab.hpp"
#include "locality.hpp"
#include "parser.hpp"
#include "residuality.hpp"
#include "rng.hpp"
#include "structure.hpp"
#include "witness.hpp"
