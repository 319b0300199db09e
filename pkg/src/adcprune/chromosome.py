"""Search genome: per-input ADC level masks plus QAT hyperparameter genes.

Decoding turns a chromosome into one pruned ADC per feature and a training
configuration; evaluation digitizes the dataset through those ADCs, trains
the quantized classifier, and scores the two minimization objectives
(accuracy miss on the fitness split, summed front-end proxy area).  Area
depends on the masks alone, never on the training outcome.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from . import qmlp
from .adc import LevelMask, PrunedAdc, quantize_batch
from .area import GateCostTable, estimate_area, total_frontend_area
from .data import Dataset, Split, stratified_split
from .nsga2 import EvaluationFailed, Operators
from .qmlp import QuantConfig, QuantMlp, TrainSpec


class DomainError(ValueError):
    """Gene value outside its declared domain."""


# baseline-individual genes: plain SGD at the fixed default learning rate
# needs the longer-epoch / smaller-batch corner to train the conventional
# front-end to saturation, which keeps the reference accuracy honest
DEFAULT_GENES = {"weight_bits": 8, "activation_bits": 8, "batch_size": 16, "epochs": 100}


@dataclass(frozen=True)
class GeneDomains:
    weight_bits: tuple[int, ...] = (4, 5, 6, 7, 8)
    activation_bits: tuple[int, ...] = (4, 5, 6, 7, 8)
    batch_size: tuple[int, ...] = (8, 16, 32, 64)
    epochs: tuple[int, ...] = (10, 20, 30, 40, 50, 60, 70, 80, 90, 100)

    def __post_init__(self):
        for name in ("weight_bits", "activation_bits", "batch_size", "epochs"):
            dom = getattr(self, name)
            if not dom or any(not isinstance(v, int) or v < 1 for v in dom):
                raise ValueError(f"gene domain {name} must be non-empty positive ints: {dom}")

    def baseline_gene(self, name: str) -> int:
        """Default gene value, snapped to the nearest domain member."""
        dom = getattr(self, name)
        want = DEFAULT_GENES[name]
        return min(dom, key=lambda v: (abs(v - want), v))


@dataclass(frozen=True)
class Chromosome:
    masks: tuple[LevelMask, ...]
    weight_bits: int
    activation_bits: int
    batch_size: int
    epochs: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "masks": [m.to_hex() for m in self.masks],
                "weight_bits": self.weight_bits,
                "activation_bits": self.activation_bits,
                "batch_size": self.batch_size,
                "epochs": self.epochs,
            }
        )

    @classmethod
    def from_json(cls, text: str, bitwidth: int) -> "Chromosome":
        doc = json.loads(text)
        return cls(
            masks=tuple(LevelMask.from_hex(bitwidth, h) for h in doc["masks"]),
            weight_bits=int(doc["weight_bits"]),
            activation_bits=int(doc["activation_bits"]),
            batch_size=int(doc["batch_size"]),
            epochs=int(doc["epochs"]),
        )


@dataclass(frozen=True)
class EvalResult:
    accuracy: float
    accuracy_miss: float
    frontend_area: float
    test_accuracy: float
    model: QuantMlp | None = None

    @property
    def objectives(self) -> tuple[float, float]:
        return (self.accuracy_miss, self.frontend_area)


@dataclass(frozen=True)
class EvalContext:
    """Read-only evaluation state shared by every individual in a run."""

    bitwidth: int
    train_x: np.ndarray
    train_y: np.ndarray
    fit_x: np.ndarray
    fit_y: np.ndarray
    test_x: np.ndarray
    test_y: np.ndarray
    n_classes: int
    hidden_layers: tuple[int, ...]
    costs: GateCostTable
    domains: GeneDomains
    seed: int
    learning_rate: float = 0.01

    @property
    def n_features(self) -> int:
        return self.train_x.shape[1]


def build_context(
    ds: Dataset,
    split: Split,
    bitwidth: int = 4,
    hidden_layers=(10,),
    costs: GateCostTable = GateCostTable(),
    domains: GeneDomains = GeneDomains(),
    fitness_split: str = "test",
    seed: int = 0,
    learning_rate: float = 0.01,
) -> EvalContext:
    """Assemble the shared evaluation context from a dataset and its split.

    fitness_split "test" scores fitness on the held-out test set (the
    reported protocol); "validation" carves a stratified 20% out of the
    train set for fitness, leaving the test set untouched by selection.
    """
    train_x, train_y = ds.features[split.train], ds.labels[split.train]
    test_x, test_y = ds.features[split.test], ds.labels[split.test]
    if fitness_split == "test":
        fit_x, fit_y = test_x, test_y
    elif fitness_split == "validation":
        sub = Dataset(
            name=ds.name,
            features=train_x,
            labels=train_y,
            feature_mins=ds.feature_mins,
            feature_maxes=ds.feature_maxes,
            label_names=ds.label_names,
        )
        inner = stratified_split(sub, train_frac=0.8, seed=seed)
        fit_x, fit_y = train_x[inner.test], train_y[inner.test]
        train_x, train_y = train_x[inner.train], train_y[inner.train]
    else:
        raise ValueError(f"fitness_split must be 'test' or 'validation', got {fitness_split!r}")
    return EvalContext(
        bitwidth=bitwidth,
        train_x=train_x,
        train_y=train_y,
        fit_x=fit_x,
        fit_y=fit_y,
        test_x=test_x,
        test_y=test_y,
        n_classes=ds.n_classes,
        hidden_layers=tuple(hidden_layers),
        costs=costs,
        domains=domains,
        seed=seed,
        learning_rate=learning_rate,
    )


def decode(ch: Chromosome, ctx: EvalContext):
    """Chromosome -> (per-feature ADCs, quantization config, training spec)."""
    if len(ch.masks) != ctx.n_features:
        raise DomainError(f"chromosome has {len(ch.masks)} masks for {ctx.n_features} features")
    for gene in ("weight_bits", "activation_bits", "batch_size", "epochs"):
        value = getattr(ch, gene)
        if value not in getattr(ctx.domains, gene):
            raise DomainError(f"{gene}={value} outside domain {getattr(ctx.domains, gene)}")
    adcs = [PrunedAdc(bitwidth=ctx.bitwidth, mask=m) for m in ch.masks]
    cfg = QuantConfig(
        weight_bits=ch.weight_bits,
        activation_bits=ch.activation_bits,
        input_bits=ctx.bitwidth,
    )
    spec = TrainSpec(
        batch_size=ch.batch_size,
        epochs=ch.epochs,
        learning_rate=ctx.learning_rate,
        seed=ctx.seed,
    )
    return adcs, cfg, spec


def digitize_features(adcs, x: np.ndarray) -> np.ndarray:
    return np.column_stack([quantize_batch(adc, x[:, i]) for i, adc in enumerate(adcs)])


def evaluate(ch: Chromosome, ctx: EvalContext, index: int = 0) -> EvalResult:
    """Train and score one individual; deterministic in (ctx.seed, index)."""
    adcs, cfg, spec = decode(ch, ctx)
    seed = ctx.seed ^ index
    spec = replace(spec, seed=seed)
    qx_train = digitize_features(adcs, ctx.train_x)
    qx_fit = digitize_features(adcs, ctx.fit_x)

    model = QuantMlp(
        [ctx.n_features, *ctx.hidden_layers, ctx.n_classes], cfg=cfg, seed=seed
    )
    qmlp.train(model, qx_train, ctx.train_y, spec)
    area = total_frontend_area(adcs, ctx.costs)
    if model.diverged:
        return EvalResult(
            accuracy=0.0, accuracy_miss=1.0, frontend_area=area,
            test_accuracy=0.0, model=model,
        )
    accuracy = qmlp.evaluate(model, qx_fit, ctx.fit_y)
    qx_test = digitize_features(adcs, ctx.test_x)
    test_accuracy = qmlp.evaluate(model, qx_test, ctx.test_y)
    return EvalResult(
        accuracy=accuracy,
        accuracy_miss=1.0 - accuracy,
        frontend_area=area,
        test_accuracy=test_accuracy,
        model=model,
    )


def objectives(ch: Chromosome, ctx: EvalContext, index: int = 0) -> tuple[float, float]:
    """Engine-facing evaluation; domain violations become failures."""
    try:
        return evaluate(ch, ctx, index).objectives
    except DomainError as exc:
        raise EvaluationFailed(str(exc)) from exc


def area_breakdown(ch: Chromosome, ctx: EvalContext) -> list[dict]:
    rows = []
    for mask in ch.masks:
        est = estimate_area(PrunedAdc(bitwidth=ctx.bitwidth, mask=mask), ctx.costs)
        rows.append(
            {"comparators": est.comparators, "or2_gates": est.or2_gates, "total": est.total}
        )
    return rows


# --------------------------------------------------------------------------
# variation operators

def crossover(a: Chromosome, b: Chromosome, rng: np.random.Generator, swap_prob: float = 0.5):
    """Uniform crossover: each mask (whole feature) and each gene is one locus."""
    if len(a.masks) != len(b.masks):
        raise ValueError("parents have different mask counts")
    masks1, masks2 = [], []
    for ma, mb in zip(a.masks, b.masks):
        if rng.random() < swap_prob:
            ma, mb = mb, ma
        masks1.append(ma)
        masks2.append(mb)
    genes1, genes2 = {}, {}
    for gene in ("weight_bits", "activation_bits", "batch_size", "epochs"):
        va, vb = getattr(a, gene), getattr(b, gene)
        if rng.random() < swap_prob:
            va, vb = vb, va
        genes1[gene] = va
        genes2[gene] = vb
    return (
        Chromosome(masks=tuple(masks1), **genes1),
        Chromosome(masks=tuple(masks2), **genes2),
    )


def mutate(
    ch: Chromosome,
    rng: np.random.Generator,
    domains: GeneDomains = GeneDomains(),
    bit_rate: float | None = None,
    gene_rate: float = 0.1,
) -> Chromosome:
    """Flip mask bits at `bit_rate` (default 1/levels) and resample genes."""
    n_levels = len(ch.masks[0].bits) if ch.masks else 0
    if bit_rate is None:
        bit_rate = 1.0 / n_levels if n_levels else 0.0
    masks = []
    for mask in ch.masks:
        flips = rng.random(n_levels) < bit_rate
        masks.append(LevelMask(tuple(bool(b) ^ bool(f) for b, f in zip(mask.bits, flips))))
    genes = {}
    for gene in ("weight_bits", "activation_bits", "batch_size", "epochs"):
        value = getattr(ch, gene)
        if rng.random() < gene_rate:
            dom = getattr(domains, gene)
            value = int(dom[rng.integers(len(dom))])
        genes[gene] = value
    return Chromosome(masks=tuple(masks), **genes)


def random_chromosome(ctx: EvalContext, rng: np.random.Generator) -> Chromosome:
    """Random individual with mask-bit density drawn uniformly from [0.2, 1.0]."""
    n_levels = 2**ctx.bitwidth - 1
    density = rng.uniform(0.2, 1.0)
    masks = tuple(
        LevelMask(tuple(bool(v) for v in rng.random(n_levels) < density))
        for _ in range(ctx.n_features)
    )
    genes = {
        gene: int(getattr(ctx.domains, gene)[rng.integers(len(getattr(ctx.domains, gene)))])
        for gene in ("weight_bits", "activation_bits", "batch_size", "epochs")
    }
    return Chromosome(masks=masks, **genes)


def baseline_chromosome(ctx: EvalContext) -> Chromosome:
    """Conventional front-end: full masks, default QAT genes."""
    full = LevelMask.full(ctx.bitwidth)
    return Chromosome(
        masks=(full,) * ctx.n_features,
        weight_bits=ctx.domains.baseline_gene("weight_bits"),
        activation_bits=ctx.domains.baseline_gene("activation_bits"),
        batch_size=ctx.domains.baseline_gene("batch_size"),
        epochs=ctx.domains.baseline_gene("epochs"),
    )


def seed_population(size: int, ctx: EvalContext, rng: np.random.Generator) -> list[Chromosome]:
    """Baseline individual first, then random individuals."""
    if size < 4:
        raise ValueError(f"population size must be >= 4, got {size}")
    return [baseline_chromosome(ctx)] + [random_chromosome(ctx, rng) for _ in range(size - 1)]


def make_operators(ctx: EvalContext) -> Operators:
    return Operators(
        sample=lambda rng: random_chromosome(ctx, rng),
        crossover=crossover,
        mutate=lambda ch, rng: mutate(ch, rng, domains=ctx.domains),
    )
