#pragma once

#include <bap/action.hpp>
#include <bap/analysis.hpp>
#include <bap/corpus.hpp>
#include <bap/dsl.hpp>
#include <bap/eval.hpp>
#include <bap/mistakes.hpp>
#include <bap/prompting.hpp>
#include <bap/provider.hpp>
#include <bap/raw_import.hpp>
#include <bap/remote.hpp>
#include <bap/retrieval.hpp>
#include <bap/run.hpp>
#include <bap/util.hpp>
#include <bap/world.hpp>
