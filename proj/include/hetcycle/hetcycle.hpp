#pragma once

#include "hetcycle/affine.hpp"
#include "hetcycle/config.hpp"
#include "hetcycle/corbd.hpp"
#include "hetcycle/cycle_data.hpp"
#include "hetcycle/errors.hpp"
#include "hetcycle/inequalities.hpp"
#include "hetcycle/measure.hpp"
#include "hetcycle/model.hpp"
#include "hetcycle/orbit.hpp"
#include "hetcycle/report.hpp"
#include "hetcycle/tower.hpp"
#include "hetcycle/verify.hpp"
#include "hetcycle/word.hpp"
