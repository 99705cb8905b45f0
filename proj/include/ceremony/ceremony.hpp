#pragma once

#include "ceremony/core.hpp"
#include "ceremony/spec.hpp"
#include "ceremony/parse.hpp"
#include "ceremony/compile.hpp"
#include "ceremony/mutate.hpp"
#include "ceremony/execute.hpp"
#include "ceremony/explore.hpp"
#include "ceremony/property.hpp"
#include "ceremony/report.hpp"
#include "ceremony/oracle.hpp"
