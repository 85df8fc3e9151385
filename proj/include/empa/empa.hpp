#ifndef EMPA_EMPA_HPP_
#define EMPA_EMPA_HPP_

#include "empa/agents/backend.hpp"
#include "empa/agents/chat_client.hpp"
#include "empa/agents/judge_wire.hpp"
#include "empa/agents/llm_backends.hpp"
#include "empa/agents/scripted.hpp"
#include "empa/axis_vector.hpp"
#include "empa/config.hpp"
#include "empa/epm.hpp"
#include "empa/error.hpp"
#include "empa/exit_codes.hpp"
#include "empa/json.hpp"
#include "empa/metrics.hpp"
#include "empa/orchestrator.hpp"
#include "empa/pair_set.hpp"
#include "empa/perturb.hpp"
#include "empa/report.hpp"
#include "empa/rubric.hpp"
#include "empa/run_store.hpp"
#include "empa/sampling.hpp"
#include "empa/scenario.hpp"
#include "empa/scenario_pipeline.hpp"

#endif  // EMPA_EMPA_HPP_
