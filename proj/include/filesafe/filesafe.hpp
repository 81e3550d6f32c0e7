#pragma once

#include "filesafe/ast.hpp"
#include "filesafe/cli.hpp"
#include "filesafe/error.hpp"
#include "filesafe/explorer.hpp"
#include "filesafe/machine.hpp"
#include "filesafe/parser.hpp"
#include "filesafe/printer.hpp"
#include "filesafe/report.hpp"
#include "filesafe/semantics.hpp"
