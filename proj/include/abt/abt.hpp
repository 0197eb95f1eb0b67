#pragma once

#include "abt/algebra.hpp"
#include "abt/contexts.hpp"
#include "abt/error.hpp"
#include "abt/parser.hpp"
#include "abt/printer.hpp"
#include "abt/sequents.hpp"
#include "abt/sheaf_enum.hpp"
#include "abt/sheafcheck.hpp"
#include "abt/signature.hpp"
#include "abt/sorts.hpp"
#include "abt/term.hpp"
