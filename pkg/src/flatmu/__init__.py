"""Satisfiability for flat coalgebraic fixed point logics via timed-out tableaux."""
from __future__ import annotations

from .formula import (BOT, TOP, DefinitionError, FixpointDef, Formula, Modality, Signature,
                      box, conj, diamond, disj, dual, fischer_ladner, gbox, gdiamond, modal,
                      mu, negate, nprop, nu, prop, to_text, var)
from .parser import Definitions, ParseError, parse, parse_definition, standard_definitions
from .rules import CoefficientBounds, Demand, OneStepRule, all_demands, dump_demands
from .semantics import BatchModels, ConcreteModel, enumerate_models, evaluate, holds
from .tableau import SolverConfig, Verdict, decide, saturate
from .extract import check_coherent, extract_model, verify_model
from .oracle import OracleBounds, brute_force_sat
from .problem import ProblemFile, Query, load_problem, parse_problem
from .harness import FuzzConfig, Report, cross_check, fuzz, run

__all__ = [
    "BOT", "TOP", "DefinitionError", "FixpointDef", "Formula", "Modality", "Signature", "box",
    "conj", "diamond", "disj", "dual", "fischer_ladner", "gbox", "gdiamond", "modal", "mu",
    "negate", "nprop", "nu", "prop", "to_text", "var", "Definitions", "ParseError", "parse",
    "parse_definition", "standard_definitions", "CoefficientBounds", "Demand", "OneStepRule",
    "all_demands", "dump_demands", "BatchModels", "ConcreteModel", "enumerate_models",
    "evaluate", "holds", "SolverConfig", "Verdict", "decide", "saturate", "check_coherent",
    "extract_model", "verify_model", "OracleBounds", "brute_force_sat", "ProblemFile", "Query",
    "load_problem", "parse_problem", "FuzzConfig", "Report", "cross_check", "fuzz", "run",
]
