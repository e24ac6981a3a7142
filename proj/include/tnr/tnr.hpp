#pragma once

#include "tnr/audit.hpp"
#include "tnr/cluster.hpp"
#include "tnr/command.hpp"
#include "tnr/faults.hpp"
#include "tnr/health.hpp"
#include "tnr/inverse.hpp"
#include "tnr/lint.hpp"
#include "tnr/manifest.hpp"
#include "tnr/oracles.hpp"
#include "tnr/orchestrator.hpp"
#include "tnr/policy/bootstrap.hpp"
#include "tnr/policy/external.hpp"
#include "tnr/policy/observation.hpp"
#include "tnr/policy/playbook.hpp"
#include "tnr/policy/policy.hpp"
#include "tnr/policy/random.hpp"
#include "tnr/reads.hpp"
#include "tnr/reconcile.hpp"
#include "tnr/scenario.hpp"
#include "tnr/severity.hpp"
#include "tnr/suite.hpp"
#include "tnr/transition.hpp"
#include "tnr/txn_engine.hpp"
#include "tnr/undo_stack.hpp"
#include "tnr/workload.hpp"
