#pragma once

#include "bnsl/bit_row.hpp"
#include "bnsl/dataset.hpp"
#include "bnsl/errors.hpp"
#include "bnsl/heuristics.hpp"
#include "bnsl/parent_store.hpp"
#include "bnsl/report.hpp"
#include "bnsl/scoring.hpp"
#include "bnsl/search.hpp"
#include "bnsl/variable_set.hpp"
#include "bnsl/verify.hpp"
