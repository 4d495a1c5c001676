"""Population-based optimizers: NSGA-II, MOEA/WST, MOEA/D and random search.

All runners share one seeding rule: ``SeedSequence(seed).spawn(4)`` gives
independent streams for (sampling, selection, crossover, mutation), in
that order.  Objectives are minimized internally; problems negate any
maximized objective at their boundary.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from ..ot import emd_lp
from ..errors import ConfigError, SamplingExhaustedError, UnevaluatedIndividualError
from .operators import binary_tournament, wst_tournament_select
from .pareto import (
    build_weight_vectors,
    chebyshev_scalarize,
    crowding_distance,
    hypervolume,
    non_dominated_mask,
    non_dominated_sort,
)

log = logging.getLogger(__name__)

STREAMS = ("sampling", "selection", "crossover", "mutation")


@dataclass
class Individual:
    genotype: np.ndarray
    objectives: np.ndarray | None = None
    constraint_violation: float = 0.0
    signature: object = None

    @property
    def evaluated(self):
        return self.objectives is not None

    @property
    def feasible(self):
        return self.constraint_violation <= 0.0


@dataclass
class Evaluation:
    objectives: np.ndarray
    constraint_violation: float = 0.0
    signature: object = None


class Problem:
    """Base class for problems the optimizers can run on.

    Subclasses set ``n_obj`` and ``objective_names`` and implement
    ``sample``, ``evaluate``, ``crossover`` and ``mutate``.
    ``specific_crossover`` is the operator MOEA/WST uses when the problem
    has a tailored one; the default returns ``None`` meaning "use
    ``crossover``".  ``senses`` holds +1 for minimized and -1 for maximized
    objectives, in the order the user reads them.
    """

    n_obj = 2
    objective_names = ("f1", "f2")
    senses = (1, 1)
    reference_point = None

    def sample(self, rng, n, exclude=frozenset()):
        raise NotImplementedError

    def evaluate(self, genotype) -> Evaluation:
        raise NotImplementedError

    def crossover(self, a, b, rng):
        raise NotImplementedError

    def specific_crossover(self, a, b, rng):
        return None

    def mutate(self, genotype, prob, rng):
        return genotype

    def key(self, genotype) -> bytes:
        g = np.ascontiguousarray(genotype)
        return g.dtype.str.encode() + bytes(str(g.shape), "ascii") + g.tobytes()

    def format_genotype(self, genotype) -> str:
        g = np.asarray(genotype)
        if g.dtype.kind in "biu" and g.ndim == 1 and set(np.unique(g)) <= {0, 1}:
            return "".join(str(int(v)) for v in g)
        return ";".join(str(int(v)) for v in g.ravel())

    def natural(self, objectives):
        """Internal (minimized) objective values back in user orientation."""
        return np.asarray(objectives, dtype=float) * np.asarray(self.senses, dtype=float)


@dataclass
class OptimizerConfig:
    population_size: int = 40
    offspring_per_generation: int = 10
    generations: int = 100
    mutation_probability: float = 0.5
    sbx_eta: float = 3.0
    seed: int = 0
    reference_point: tuple | None = None
    neighborhood_size: int = 10
    record_timing: bool = False
    max_mating_attempts: int = 50

    def validate(self):
        if self.population_size < 2:
            raise ConfigError("population_size", "must be at least 2")
        if self.offspring_per_generation < 1:
            raise ConfigError("offspring_per_generation", "must be at least 1")
        if self.generations < 0:
            raise ConfigError("generations", "must be nonnegative")
        if not 0.0 <= self.mutation_probability <= 1.0:
            raise ConfigError("mutation_probability", "must lie in [0, 1]")
        if self.sbx_eta <= 0:
            raise ConfigError("sbx_eta", "must be positive")
        if self.neighborhood_size < 1:
            raise ConfigError("neighborhood_size", "must be at least 1")


@dataclass
class GenerationLog:
    generation: int
    evaluations: int
    hypervolume: float
    elapsed_ms: float


@dataclass
class RunResult:
    algorithm: str
    history: list = field(default_factory=list)
    population: list = field(default_factory=list)
    pareto: list = field(default_factory=list)
    objective_names: tuple = ()
    senses: tuple = ()

    @property
    def front(self) -> np.ndarray:
        """Final Pareto front in internal (minimized) orientation."""
        if not self.pareto:
            return np.zeros((0, len(self.senses)))
        return np.array([ind.objectives for ind in self.pareto])

    @property
    def natural_front(self) -> np.ndarray:
        return self.front * np.asarray(self.senses, dtype=float)

    @property
    def hypervolumes(self):
        return [h.hypervolume for h in self.history]


def pareto_subset(individuals):
    """Feasible non-dominated individuals; the least-violating ones if none is feasible."""
    pool = [ind for ind in individuals if ind.feasible]
    if not pool:
        if not individuals:
            return []
        best = min(ind.constraint_violation for ind in individuals)
        return [ind for ind in individuals if ind.constraint_violation == best]
    F = np.array([ind.objectives for ind in pool])
    mask = non_dominated_mask(F)
    return [ind for ind, keep in zip(pool, mask) if keep]


def rank_population(individuals):
    """Constrained non-dominated ranking plus crowding distance per individual.

    Feasible individuals are sorted by Pareto rank; infeasible ones come
    after, one front per distinct violation level in increasing order.
    """
    for ind in individuals:
        if not ind.evaluated:
            raise UnevaluatedIndividualError("population contains unevaluated individuals")
    n = len(individuals)
    rank = np.zeros(n, dtype=int)
    crowd = np.zeros(n)
    fronts = []
    feas = [i for i in range(n) if individuals[i].feasible]
    infeas = [i for i in range(n) if not individuals[i].feasible]
    if feas:
        F = np.array([individuals[i].objectives for i in feas])
        for front in non_dominated_sort(F):
            fronts.append([feas[k] for k in front])
    if infeas:
        levels = sorted({individuals[i].constraint_violation for i in infeas})
        for lvl in levels:
            fronts.append([i for i in infeas if individuals[i].constraint_violation == lvl])
    for r, front in enumerate(fronts):
        F = np.array([individuals[i].objectives for i in front])
        cd = crowding_distance(F)
        for k, i in enumerate(front):
            rank[i] = r
            crowd[i] = cd[k]
    return fronts, rank, crowd


def survive(individuals, size):
    """Keep ``size`` individuals by rank then crowding; ties keep lower input index."""
    if len(individuals) <= size:
        return list(individuals)
    fronts, _, crowd = rank_population(individuals)
    keep = []
    for front in fronts:
        if len(keep) + len(front) <= size:
            keep.extend(front)
            continue
        room = size - len(keep)
        ordered = sorted(front, key=lambda i: (-crowd[i], i))
        keep.extend(ordered[:room])
        break
    return [individuals[i] for i in sorted(keep)]


class _Run:
    def __init__(self, name, problem, config):
        config.validate()
        self.name = name
        self.problem = problem
        self.config = config
        seqs = np.random.SeedSequence(config.seed).spawn(len(STREAMS))
        self.rng = {s: np.random.default_rng(q) for s, q in zip(STREAMS, seqs)}
        self.evaluations = 0
        self.archive = set()
        self.start = time.perf_counter()
        ref = config.reference_point
        if ref is None:
            ref = problem.reference_point
        self.reference = None if ref is None else np.asarray(ref, dtype=float)
        self.result = RunResult(
            algorithm=name,
            objective_names=tuple(problem.objective_names),
            senses=tuple(problem.senses),
        )

    def evaluate(self, genotypes):
        out = []
        for g in genotypes:
            self.archive.add(self.problem.key(g))
            ev = self.problem.evaluate(g)
            self.evaluations += 1
            out.append(
                Individual(
                    genotype=g,
                    objectives=np.asarray(ev.objectives, dtype=float),
                    constraint_violation=float(ev.constraint_violation),
                    signature=ev.signature,
                )
            )
        return out

    def initial_population(self, size):
        genotypes = self.problem.sample(self.rng["sampling"], size)
        if not genotypes:
            raise SamplingExhaustedError("problem produced no initial individuals")
        if len(genotypes) < size:
            log.warning(
                "%s: only %d distinct individuals available, population capped",
                self.name,
                len(genotypes),
            )
        return self.evaluate(genotypes)

    def log(self, generation, individuals):
        front = pareto_subset(individuals)
        hv = float("nan")
        if self.reference is not None:
            feas = [ind.objectives for ind in front if ind.feasible]
            hv = hypervolume(np.array(feas).reshape(-1, len(self.reference)), self.reference) if feas else 0.0
        elapsed = (time.perf_counter() - self.start) * 1000.0 if self.config.record_timing else 0.0
        self.result.history.append(GenerationLog(generation, self.evaluations, hv, elapsed))

    def finish(self, population):
        self.result.population = list(population)
        unique, seen = [], set()
        for ind in pareto_subset(population):
            key = self.problem.key(ind.genotype)
            if key not in seen:
                seen.add(key)
                unique.append(ind)
        self.result.pareto = unique
        return self.result

    def breed(self, population, n_children, pick_parents, recombine):
        """Mate until ``n_children`` children never evaluated before exist.

        After ``max_mating_attempts`` rounds per child, duplicates are accepted.
        """
        seen = set(self.archive)
        children = []
        attempts = 0
        limit = self.config.max_mating_attempts * n_children
        while len(children) < n_children:
            a, b = pick_parents()
            kids = recombine(a, b)
            for kid in kids:
                if len(children) >= n_children:
                    break
                kid = self.problem.mutate(kid, self.config.mutation_probability, self.rng["mutation"])
                key = self.problem.key(kid)
                attempts += 1
                if key in seen and attempts < limit:
                    continue
                seen.add(key)
                children.append(kid)
        return children


def _evolve(name, problem, config, select, use_specific):
    run = _Run(name, problem, config)
    pop = run.initial_population(config.population_size)
    size = len(pop)
    run.log(0, pop)

    def recombine(a, b):
        rng = run.rng["crossover"]
        if use_specific:
            kids = problem.specific_crossover(a.genotype, b.genotype, rng)
            if kids is not None:
                return kids
        return problem.crossover(a.genotype, b.genotype, rng)

    for gen in range(1, config.generations + 1):
        fronts, rank, crowd = rank_population(pop)
        pick = select(pop, fronts, rank, crowd, run.rng["selection"])
        kids = run.breed(pop, config.offspring_per_generation, pick, recombine)
        pop = survive(pop + run.evaluate(kids), size)
        run.log(gen, pop)
    return run.finish(pop)


def _nsga2_select(pop, fronts, rank, crowd, rng):
    def pick():
        i = binary_tournament(rank, crowd, rng)
        j = binary_tournament(rank, crowd, rng)
        return pop[i], pop[j]

    return pick


class _WstSelect:
    """Wasserstein tournaments on the rank-0 front with a run-wide distance cache.

    The cache holds the signature objects themselves, so their ids cannot
    be recycled while the key is in use.
    """

    def __init__(self):
        self.cache = {}

    def distance(self, a, b):
        key = (id(a), id(b)) if id(a) <= id(b) else (id(b), id(a))
        hit = self.cache.get(key)
        if hit is None:
            hit = self.cache[key] = (a, b, emd_lp(a, b).cost)
        return hit[2]

    def __call__(self, pop, fronts, rank, crowd, rng):
        first = [pop[i] for i in fronts[0]]
        return lambda: wst_tournament_select(first, rng, self.distance)


def run_nsga2(problem, config) -> RunResult:
    """NSGA-II: rank/crowding tournaments, generic crossover, elitist survival."""
    return _evolve("nsga2", problem, config, _nsga2_select, use_specific=False)


def run_moea_wst(problem, config) -> RunResult:
    """MOEA/WST: NSGA-II survival with Wasserstein tournaments on the first front
    and the problem's own crossover when it has one."""
    return _evolve("moea_wst", problem, config, _WstSelect(), use_specific=True)


def run_random_search(problem, config) -> RunResult:
    """Uniform sampling of unseen genotypes with the evolutionary runs' evaluation budget."""
    run = _Run("random", problem, config)
    archive = run.initial_population(config.population_size)
    seen = {problem.key(ind.genotype) for ind in archive}
    front = pareto_subset(archive)
    run.log(0, front)
    for gen in range(1, config.generations + 1):
        batch = problem.sample(run.rng["sampling"], config.offspring_per_generation, exclude=seen)
        seen.update(problem.key(g) for g in batch)
        front = pareto_subset(front + run.evaluate(batch))
        run.log(gen, front)
    return run.finish(front)


def run_moead(problem, config, weights=None) -> RunResult:
    """MOEA/D with Chebyshev subproblems.

    ``offspring_per_generation`` subproblems are visited per generation in
    round-robin order; each mates two random neighbours, and the child
    replaces every neighbour it does not worsen.  Infeasible comparisons
    fall back to constraint violation.  ``z*`` is the running ideal point.
    """
    run = _Run("moead", problem, config)
    if weights is None:
        weights = build_weight_vectors(
            config.population_size,
            problem.n_obj,
            min(config.neighborhood_size, config.population_size),
        )
    pop = run.initial_population(len(weights))
    # a small search space may not fill every subproblem; reuse individuals
    pop = [pop[i % len(pop)] for i in range(len(weights))]
    n_sub = len(pop)
    lam = weights.vectors
    neighbors = weights.neighbors
    z = np.min([ind.objectives for ind in pop], axis=0)
    run.log(0, pop)

    def better(child, incumbent, lam_j):
        if not (child.feasible and incumbent.feasible):
            return child.constraint_violation <= incumbent.constraint_violation
        return chebyshev_scalarize(child.objectives, lam_j, z) <= chebyshev_scalarize(
            incumbent.objectives, lam_j, z
        )

    cursor = 0
    sel = run.rng["selection"]
    for gen in range(1, config.generations + 1):
        for _ in range(config.offspring_per_generation):
            i = cursor % n_sub
            cursor += 1
            hood = neighbors[i]
            if len(hood) >= 2:
                k, l_ = sel.choice(hood, size=2, replace=False)
            else:
                k = l_ = hood[0]
            kid = problem.crossover(pop[k].genotype, pop[l_].genotype, run.rng["crossover"])[0]
            kid = problem.mutate(kid, config.mutation_probability, run.rng["mutation"])
            child = run.evaluate([kid])[0]
            z = np.minimum(z, child.objectives)
            for j in hood:
                if better(child, pop[j], lam[j]):
                    pop[j] = child
        run.log(gen, pop)
    return run.finish(pop)


ALGORITHMS = {
    "nsga2": run_nsga2,
    "moea_wst": run_moea_wst,
    "moead": run_moead,
    "random": run_random_search,
}
