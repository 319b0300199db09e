"""Elitist two-objective genetic engine (NSGA-II).

Generic over the genome: the problem supplies sample/crossover/mutate
operators and an evaluation callback returning two minimization objectives.
Evaluation failures become worst-case objectives so broken individuals are
selected away instead of crashing the run.  Everything is driven by one
seeded generator plus per-individual evaluation indices, so results are
reproducible regardless of how evaluations are scheduled.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from typing import Any, Callable, NamedTuple

import numpy as np

FAILURE_OBJECTIVES = (1.0, sys.float_info.max)


class EvaluationFailed(Exception):
    """Raised by evaluation callbacks for individuals that cannot be scored."""


@dataclass
class Individual:
    genome: Any
    objectives: tuple[float, float] | None = None
    rank: int = -1
    crowding: float = 0.0
    eval_index: int = -1  # unique evaluation counter; seeds per-individual RNG


@dataclass(frozen=True)
class GaParams:
    population: int = 50
    generations: int = 100
    crossover_prob: float = 0.7
    mutation_prob: float = 0.2
    seed: int = 0
    hv_reference: tuple[float, float] | None = None

    def __post_init__(self):
        if self.population < 4 or self.population % 2:
            raise ValueError(f"population must be even and >= 4, got {self.population}")
        if self.generations < 0:
            raise ValueError(f"generations must be >= 0, got {self.generations}")
        for name in ("crossover_prob", "mutation_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {p}")


class Operators(NamedTuple):
    sample: Callable  # rng -> genome
    crossover: Callable  # (genome, genome, rng) -> (genome, genome)
    mutate: Callable  # (genome, rng) -> genome


def dominates(a, b) -> bool:
    """a dominates b: no worse in every objective, strictly better in one."""
    return all(x <= y for x, y in zip(a, b)) and any(x < y for x, y in zip(a, b))


def fast_non_dominated_sort(objectives) -> list[list[int]]:
    """Partition indices into dominance fronts (front 0 = non-dominated)."""
    n = len(objectives)
    dominated_by: list[list[int]] = [[] for _ in range(n)]
    counts = [0] * n
    fronts: list[list[int]] = [[]]
    for p in range(n):
        for q in range(n):
            if p == q:
                continue
            if dominates(objectives[p], objectives[q]):
                dominated_by[p].append(q)
            elif dominates(objectives[q], objectives[p]):
                counts[p] += 1
        if counts[p] == 0:
            fronts[0].append(p)
    i = 0
    while fronts[i]:
        nxt = []
        for p in fronts[i]:
            for q in dominated_by[p]:
                counts[q] -= 1
                if counts[q] == 0:
                    nxt.append(q)
        i += 1
        fronts.append(nxt)
    fronts.pop()
    return fronts


def crowding_distance(objectives) -> np.ndarray:
    """Per-individual crowding of one front; boundary points get +inf.

    Interior distances sum the normalized neighbor gaps per objective; an
    objective with zero range across the front contributes nothing.
    """
    n = len(objectives)
    if n == 0:
        raise ValueError("crowding_distance needs a non-empty front")
    dist = np.zeros(n)
    if n <= 2:
        dist[:] = math.inf
        return dist
    obj = np.asarray(objectives, dtype=np.float64)
    for m in range(obj.shape[1]):
        order = np.argsort(obj[:, m], kind="stable")
        lo, hi = obj[order[0], m], obj[order[-1], m]
        dist[order[0]] = dist[order[-1]] = math.inf
        span = hi - lo
        if span == 0.0:
            continue
        for k in range(1, n - 1):
            dist[order[k]] += (obj[order[k + 1], m] - obj[order[k - 1], m]) / span
    return dist


def hypervolume(points, reference) -> float:
    """Dominated 2-D area below `reference`; points beyond it contribute 0.

    Left-to-right sweep: after sorting by f1, a point only adds area if it
    improves f2, which silently drops dominated points.
    """
    rx, ry = reference
    hv = 0.0
    prev_f2 = ry
    for f1, f2 in sorted((f1, f2) for f1, f2 in points if f1 <= rx and f2 <= ry):
        if f2 < prev_f2:
            hv += (rx - f1) * (prev_f2 - f2)
            prev_f2 = f2
    return hv


@dataclass
class EvolveResult:
    population: list[Individual]
    archive: list[Individual]  # best non-dominated set seen over the whole run
    history: list[dict] = field(default_factory=list)


def _offer_to_archive(archive: list[Individual], ind: Individual) -> None:
    """Keep `archive` a minimal non-dominated set (first point wins ties)."""
    for kept in archive:
        if kept.objectives == ind.objectives or dominates(kept.objectives, ind.objectives):
            return
    archive[:] = [a for a in archive if not dominates(ind.objectives, a.objectives)]
    archive.append(ind)


def _assign_fronts(individuals: list[Individual]) -> list[list[int]]:
    fronts = fast_non_dominated_sort([ind.objectives for ind in individuals])
    for rank, front in enumerate(fronts):
        dists = crowding_distance([individuals[i].objectives for i in front])
        for i, d in zip(front, dists):
            individuals[i].rank = rank
            individuals[i].crowding = float(d)
    return fronts


def _tournament(pop: list[Individual], rng: np.random.Generator) -> Individual:
    i, j = rng.choice(len(pop), size=2, replace=False)
    a, b = pop[i], pop[j]
    if a.rank != b.rank:
        return a if a.rank < b.rank else b
    if a.crowding != b.crowding:
        return a if a.crowding > b.crowding else b
    return a if rng.random() < 0.5 else b


def _evaluate_serial(evaluate, pairs):
    out = []
    for index, genome in pairs:
        try:
            out.append(tuple(evaluate(genome, index)))
        except EvaluationFailed:
            out.append(FAILURE_OBJECTIVES)
    return out


def evolve(
    evaluate,
    operators: Operators,
    params: GaParams,
    initial=None,
    evaluate_many=None,
    on_generation=None,
) -> EvolveResult:
    """Run the generational loop and return population, archive, and log rows.

    `evaluate(genome, index)` returns (f1, f2) to minimize; `index` is the
    globally unique evaluation counter (the hook for per-individual seeding).
    `initial` optionally seeds the starting genomes (length == population);
    otherwise `operators.sample` draws them.  `evaluate_many` may override
    the serial evaluation of a [(index, genome), ...] batch, e.g. with a
    process pool; it must preserve order and apply the failure contract.

    The returned archive is an elite non-dominated set accumulated over every
    evaluation, so its hypervolume never decreases across generations (the
    population's own front 0 can lose interior points to crowding truncation
    when it outgrows the population).
    """
    rng = np.random.default_rng(params.seed)
    eval_many = evaluate_many or (lambda pairs: _evaluate_serial(evaluate, pairs))

    if initial is not None:
        genomes = list(initial)
        if len(genomes) != params.population:
            raise ValueError(
                f"initial population has {len(genomes)} genomes, expected {params.population}"
            )
    else:
        genomes = [operators.sample(rng) for _ in range(params.population)]

    next_index = 0
    archive: list[Individual] = []

    def make_individuals(gs):
        nonlocal next_index
        pairs = [(next_index + k, g) for k, g in enumerate(gs)]
        next_index += len(gs)
        scores = eval_many(pairs)
        out = [
            Individual(genome=g, objectives=tuple(s), eval_index=i)
            for (i, g), s in zip(pairs, scores)
        ]
        for ind in out:
            _offer_to_archive(archive, ind)
        return out

    population = make_individuals(genomes)
    fronts = _assign_fronts(population)

    if params.hv_reference is not None:
        reference = params.hv_reference
    else:
        # fixed at generation 0: worst non-sentinel value per objective
        objs = np.asarray([ind.objectives for ind in population], dtype=np.float64)
        ref = []
        for m in range(objs.shape[1]):
            col = objs[:, m][objs[:, m] < FAILURE_OBJECTIVES[1]]
            ref.append(float(col.max()) if len(col) else 1.0)
        reference = tuple(ref)

    history: list[dict] = []

    def log_generation(gen):
        row = {
            "gen": gen,
            "best_f1": min(ind.objectives[0] for ind in population),
            "best_f2": min(ind.objectives[1] for ind in population),
            "front0_size": len(fronts[0]),
            "hypervolume": hypervolume([ind.objectives for ind in archive], reference),
        }
        history.append(row)
        if on_generation is not None:
            on_generation(row)

    log_generation(0)

    for gen in range(1, params.generations + 1):
        offspring_genomes = []
        while len(offspring_genomes) < params.population:
            p1 = _tournament(population, rng)
            p2 = _tournament(population, rng)
            if rng.random() < params.crossover_prob:
                c1, c2 = operators.crossover(p1.genome, p2.genome, rng)
            else:
                c1, c2 = p1.genome, p2.genome
            for child in (c1, c2):
                if rng.random() < params.mutation_prob:
                    child = operators.mutate(child, rng)
                offspring_genomes.append(child)
        offspring = make_individuals(offspring_genomes[: params.population])

        combined = population + offspring
        combined_fronts = fast_non_dominated_sort([ind.objectives for ind in combined])
        survivors: list[Individual] = []
        for front in combined_fronts:
            if len(survivors) + len(front) <= params.population:
                survivors.extend(combined[i] for i in front)
            else:
                dists = crowding_distance([combined[i].objectives for i in front])
                order = np.argsort(-dists, kind="stable")
                need = params.population - len(survivors)
                survivors.extend(combined[front[k]] for k in order[:need])
            if len(survivors) == params.population:
                break
        population = survivors
        fronts = _assign_fronts(population)
        log_generation(gen)

    return EvolveResult(population=population, archive=list(archive), history=history)
