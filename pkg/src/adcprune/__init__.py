"""adcprune: joint optimization of level-pruned flash ADC front-ends and
power-of-2 quantized MLP classifiers, with a gate-level netlist oracle."""

try:
    from importlib.metadata import version as _version

    __version__ = _version("adcprune")
except Exception:
    __version__ = "0.1.0"

from .adc import LevelMask, PrunedAdc, digitize, quantize_batch, thermometer, thresholds
from .area import AreaEstimate, GateCostTable, estimate_area, total_frontend_area
from .chromosome import Chromosome, EvalContext, EvalResult, GeneDomains
from .data import CsvSchema, Dataset, Split, load_csv, stratified_split
from .netlist import Netlist, compile_encoder, count_gates, emit_hdl, simulate
from .nsga2 import GaParams, Individual, evolve, fast_non_dominated_sort
from .qmlp import QuantConfig, QuantMlp, TrainSpec, infer_fixed_point, quantize_pow2

__all__ = [
    "LevelMask", "PrunedAdc", "thresholds", "thermometer", "digitize", "quantize_batch",
    "GateCostTable", "AreaEstimate", "estimate_area", "total_frontend_area",
    "Netlist", "compile_encoder", "simulate", "count_gates", "emit_hdl",
    "QuantConfig", "QuantMlp", "TrainSpec", "quantize_pow2", "infer_fixed_point",
    "GaParams", "Individual", "fast_non_dominated_sort", "evolve",
    "Chromosome", "GeneDomains", "EvalContext", "EvalResult",
    "Dataset", "Split", "CsvSchema", "load_csv", "stratified_split",
    "__version__",
]
