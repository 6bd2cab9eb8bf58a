#pragma once

#include "imply/analog.hpp"
#include "imply/ir.hpp"
#include "imply/logic.hpp"
#include "imply/report.hpp"
#include "imply/synthesis.hpp"
#include "imply/verify.hpp"
