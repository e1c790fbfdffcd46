"""Online stacking ensemble with drift detection and a label budget for data streams."""

from .active import (ALUncertainty, BaselineKind, BudgetLedger, SplitStrategy, VarUncertainty,
                     entropy_uncertainty, random_strategy)
from .evaluation import PrequentialResult, aggregate_runs, run_prequential
from .fase import FASE, FASEAL, EnsembleConfig
from .generators import DriftSpec, NoiseMode, NoiseSpec, compose_drift, generate, scenario_stream
from .hddm import HDDMA, Status
from .ingest import ParseError, UnknownColumn, parse_arff, parse_csv
from .naive_bayes import NaiveBayes
from .stream import AttributeSpec, Instance, InstanceSource, LabelOracle, Schema
from .wilcoxon import TooFewPairs, wilcoxon_signed_rank

__all__ = [
    "ALUncertainty", "AttributeSpec", "BaselineKind", "BudgetLedger", "DriftSpec",
    "EnsembleConfig", "FASE", "FASEAL", "HDDMA", "Instance", "InstanceSource", "LabelOracle",
    "NaiveBayes", "NoiseMode", "NoiseSpec", "ParseError", "PrequentialResult", "Schema",
    "SplitStrategy", "Status", "TooFewPairs", "UnknownColumn", "VarUncertainty",
    "aggregate_runs", "compose_drift", "entropy_uncertainty", "generate", "parse_arff",
    "parse_csv", "random_strategy", "run_prequential", "scenario_stream", "wilcoxon_signed_rank",
]
