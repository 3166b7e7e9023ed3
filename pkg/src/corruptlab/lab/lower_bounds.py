"""Monte Carlo separations between adaptive and oblivious adversaries.

Support size: a repeat-count tester separates small from large uniform
supports under oblivious deletions, while an adaptive adversary that deletes
duplicates blinds it.  Degree: an inner-product threshold test on +/-1 strings
accepts clean data rarely but is driven to accept by an adversary that moves
points onto the centre of the most crowded Hamming ball of its sample.
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .config import ExperimentConfig
from .report import Report

BLOCK = 2000


def _blocks(trials: int):
    for b in range(math.ceil(trials / BLOCK)):
        yield b, min(BLOCK, trials - b * BLOCK)


def _rate(hits: np.ndarray) -> tuple[float, float]:
    p = float(hits.mean())
    return p, math.sqrt(max(p * (1 - p), 0.0) / len(hits))


# --- support size ---------------------------------------------------------


def repeat_count(samples: np.ndarray) -> np.ndarray:
    """Per row, the number of draws that repeat an earlier value (n minus distinct values)."""
    s = np.sort(samples, axis=1)
    return (s[:, 1:] == s[:, :-1]).sum(axis=1)


def colliding_indices(samples: np.ndarray) -> np.ndarray:
    """Boolean mask of positions whose value occurs elsewhere in the same row."""
    order = np.argsort(samples, axis=1, kind="stable")
    s = np.take_along_axis(samples, order, axis=1)
    eq = s[:, 1:] == s[:, :-1]
    hit_sorted = np.zeros_like(s, dtype=bool)
    hit_sorted[:, 1:] |= eq
    hit_sorted[:, :-1] |= eq
    mask = np.empty_like(hit_sorted)
    np.put_along_axis(mask, order, hit_sorted, axis=1)
    return mask


def expected_repeats(k: int, n: int) -> float:
    """Exact ``n - E[distinct]`` for ``n`` uniform draws from ``k`` values."""
    return n - k * (1 - (1 - 1 / k) ** n)


def _repeat_samples(support: int, n: int, trials: int, seed: int, stream: int) -> np.ndarray:
    out = np.empty(trials, dtype=np.int64)
    lo = 0
    for b, size in _blocks(trials):
        rng = np.random.default_rng(np.random.SeedSequence([seed, stream, b]))
        out[lo : lo + size] = repeat_count(rng.integers(0, support, size=(size, n)))
        lo += size
    return out


def calibrate_collision_tester(k: int, worst_large: int, cal_trials: int, seed: int):
    """Smallest ``n = ceil(a sqrt(k))`` and threshold ``t`` whose calibration rates clear
    0.95 / 0.05 with a three-standard-error margin.  Returns ``(n, t, table)``."""
    margin = 3 * math.sqrt(0.05 * 0.95 / cal_trials)
    table = []
    for a in (1, 1.5, 2, 2.5, 3, 4, 5, 6, 8):
        n = math.ceil(a * math.sqrt(k))
        small = _repeat_samples(k, n, cal_trials, seed, 100 + n)
        large = _repeat_samples(worst_large, n, cal_trials, seed, 200 + n)
        for t in range(1, n):
            ps, pl = float((small >= t).mean()), float((large >= t).mean())
            table.append((n, t, ps, pl))
            if ps >= 0.95 + margin and pl <= 0.05 - margin:
                return n, t, table
            if ps < 0.95 + margin:
                break
    return None, None, table


def duplicate_removal_accepts(support: int, n: int, t: int, eta: float, trials: int, seed: int, stream: int):
    """Tester acceptance after the adaptive deletion of duplicates.

    ``ceil(n / (1 - eta))`` points are drawn; if at least ``n`` of them are
    collision-free the adversary keeps exactly those ``n``, otherwise it keeps
    the first ``n`` draws.  Returns ``(accept flags, fallback flags)``.
    """
    big = math.ceil(n / (1 - eta))
    acc = np.empty(trials, dtype=bool)
    fallback = np.empty(trials, dtype=bool)
    lo = 0
    for b, size in _blocks(trials):
        rng = np.random.default_rng(np.random.SeedSequence([seed, stream, b]))
        draws = rng.integers(0, support, size=(size, big))
        free = ~colliding_indices(draws)
        case1 = free.sum(axis=1) >= n
        reps = np.zeros(size, dtype=np.int64)
        # case 1 keeps n collision-free points: no repeats at all
        reps[~case1] = repeat_count(draws[~case1, :n])
        acc[lo : lo + size] = reps >= t
        fallback[lo : lo + size] = ~case1
        lo += size
    return acc, fallback


def run_support_size(cfg: ExperimentConfig) -> Report:
    cfg = cfg.resolved()
    rep = Report(cfg.experiment, cfg.as_dict())
    k, large, eta, seed = cfg.k, cfg.large_k, cfg.eta, cfg.seed
    # Deleting an eta fraction can at most concentrate Unif(large) onto (1 - eta) * large points.
    worst_large = math.ceil((1 - eta) * large)

    # Birthday contrast with the plain any-collision test.
    n0 = max(2, math.ceil(2 * math.sqrt(k)))
    r_small = _repeat_samples(k, n0, cfg.trials, seed, 1) >= 1
    r_large = _repeat_samples(large, n0, cfg.trials, seed, 2) >= 1
    (ps, ses), (pl, sel) = _rate(r_small), _rate(r_large)
    rep.measure("any_collision", {"n": n0, "small": ps, "large": pl})
    rep.check(f"any-collision rate gap at n={n0}", ps - pl, ">=", 0.5, 3 * math.hypot(ses, sel))

    n, t, table = calibrate_collision_tester(k, worst_large, cfg.calibration_trials, seed)
    rep.measure("calibration_table", [list(row) for row in table])
    if n is None:
        rep.check("a calibrated repeat-count tester exists", 0.0, "==", 1.0, note="no (n, t) on the grid separated")
        return rep.finish()
    rep.measure("tester", {"n": n, "threshold": t, "n_over_sqrt_k": n / math.sqrt(k)})
    rep.log(f"calibrated tester: n={n}, accept iff at least {t} repeats")

    small = _repeat_samples(k, n, cfg.trials, seed, 3)
    p, se = _rate(small >= t)
    rep.check(f"oblivious side: accept on |X'|={k} (uniform, fewest collisions)", p, ">=", 0.95, 3 * se, stderr=se)
    exact = expected_repeats(k, n)
    rse = float(small.std(ddof=1) / math.sqrt(len(small)))
    rep.check("mean repeat count matches the exact expectation", abs(small.mean() - exact), "<=", 0.0, 3 * rse,
              stderr=rse)
    worst = _repeat_samples(worst_large, n, cfg.trials, seed, 4)
    p, se = _rate(worst >= t)
    rep.check(f"oblivious side: accept on |X'|={large} after deleting {eta:g} of it", p, "<=", 0.05, 3 * se,
              stderr=se)
    clean_large = _repeat_samples(large, n, cfg.trials, seed, 5)
    rep.measure("clean_large_accept", float((clean_large >= t).mean()))

    # Duplicate removal by the adaptive adversary.
    acc_s, fb_s = duplicate_removal_accepts(k, n, t, eta, cfg.trials, seed, 6)
    acc_l, fb_l = duplicate_removal_accepts(large, n, t, eta, cfg.trials, seed, 7)
    (a_s, se_s), (a_l, se_l) = _rate(acc_s), _rate(acc_l)
    rep.measure("adaptive", {"accept_small": a_s, "accept_large": a_l,
                             "fallback_small": float(fb_s.mean()), "fallback_large": float(fb_l.mean())})
    rep.check(f"adaptive: accept on |X'|={k}", a_s, "<=", 0.05, 3 * se_s, stderr=se_s)
    rep.check(f"adaptive: accept on |X'|={large}", a_l, "<=", 0.05, 3 * se_l, stderr=se_l)
    rep.check("adaptive: accept-rate difference", abs(a_s - a_l), "<=", 0.05, 3 * math.hypot(se_s, se_l))

    # Few colliding indices among 2n draws with n = floor(eps k / 2).
    kk = cfg.prop_k
    nn = math.floor(cfg.epsilon * kk / 2)
    z = np.empty(cfg.trials, dtype=np.int64)
    lo = 0
    for b, size in _blocks(cfg.trials):
        rng = np.random.default_rng(np.random.SeedSequence([seed, 8, b]))
        z[lo : lo + size] = colliding_indices(rng.integers(0, kk, size=(size, 2 * nn))).sum(axis=1)
        lo += size
    p, se = _rate(z <= nn)
    rep.check(f"k={kk}: Pr[colliding indices <= {nn}] >= 1 - eps", p, ">=", 1 - cfg.epsilon, 3 * se, stderr=se)
    p, se = _rate(z >= nn)
    rep.check(f"k={kk}: Pr[colliding indices >= {nn}] <= 2n/k", p, "<=", 2 * nn / kk, 3 * se, stderr=se)
    rep.measure("colliding_indices_mean", float(z.mean()))
    return rep.finish()


# --- degree lower bound ---------------------------------------------------


def _popcount_table(d: int) -> np.ndarray:
    x = np.arange(2**d)
    return np.array([bin(int(v)).count("1") for v in x], dtype=np.int64)


def correlation_test(samples: np.ndarray, tau: int, pop: np.ndarray, d: int) -> np.ndarray:
    """Accept iff every point has another point with +/-1 inner product at least ``tau``.

    Strings are stored as integers; the inner product of their +/-1 encodings is
    ``d - 2 * hamming``.
    """
    inner = d - 2 * pop[samples[:, :, None] ^ samples[:, None, :]]
    n = samples.shape[1]
    inner[:, np.arange(n), np.arange(n)] = -1
    return (inner >= tau).any(axis=2).all(axis=1)


class DegreeInstance:
    """Strings in {-1, +1}^d stored as bit masks; ``x*`` is the all -1 string and ``D`` puts ``c/2`` on it."""

    def __init__(self, d: int, b: float, delta: float):
        self.d = d
        self.size = 2**d
        self.pop = _popcount_table(d)
        self.star = 0
        self.ones = self.size - 1
        self.c = min(1 / b, 1 - 1 / (1 + delta))
        self.change_cost = Fraction(1) + Fraction(str(delta))
        self.mass = np.full(self.size, (1 - self.c / 2) / self.size)
        self.mass[self.star] += self.c / 2
        self.cum = np.cumsum(self.mass)
        self.cum[-1] = 1.0

    def draw(self, rng, shape) -> np.ndarray:
        return np.searchsorted(self.cum, rng.random(shape), side="right")

    def budget_changes(self, m: int) -> int:
        """Number of points the adaptive adversary may change (each costs 1 + delta)."""
        return math.floor(Fraction(m) / self.change_cost)

    def best_centers(self, x: np.ndarray, radius: int) -> np.ndarray:
        """Per row, the string whose Hamming ball of ``radius`` holds the most sample points.

        Ball counts for all ``2^d`` centres are one XOR-convolution of the sample histogram
        with the ball indicator, done with the Walsh-Hadamard transform.
        """
        rows = len(x)
        flat = (np.arange(rows)[:, None] * self.size + x).ravel()
        hist = np.bincount(flat, minlength=rows * self.size).reshape(rows, self.size).astype(float)
        ball = _walsh_hadamard((self.pop <= radius).astype(float)[None, :])
        counts = _walsh_hadamard(_walsh_hadamard(hist) * ball) / self.size
        return np.argmax(np.round(counts, 6), axis=1)

    def corrupt(self, x: np.ndarray, mode: str, tau: int, centers: np.ndarray | None = None) -> np.ndarray:
        """Move points onto the best centre ``v`` for threshold ``tau``.

        ``star`` moves only the x* occurrences; ``full`` keeps the ``m - budget`` clean points
        nearest to ``v`` and moves every other point onto it.
        """
        if mode == "identity":
            return x.copy()
        if mode not in ("star", "full"):
            raise ValueError(mode)
        m = x.shape[1]
        if centers is None:
            centers = self.best_centers(x, (self.d - tau) // 2)
        v = centers[:, None]
        y = x.copy()
        if mode == "star":
            move = x == self.star
            move &= np.cumsum(move, axis=1) <= self.budget_changes(m)
        else:
            dist = self.pop[x ^ v]
            order = np.argsort(dist, axis=1, kind="stable")
            rank = np.empty_like(order)
            np.put_along_axis(rank, order, np.broadcast_to(np.arange(m), x.shape), axis=1)
            move = rank >= m - self.budget_changes(m)
        y[move] = np.broadcast_to(v, x.shape)[move]
        return y


def _walsh_hadamard(a: np.ndarray) -> np.ndarray:
    """Unnormalised Walsh-Hadamard transform along the last axis (length a power of two)."""
    out = np.array(a, dtype=float, copy=True)
    rows, size = out.reshape(-1, out.shape[-1]).shape
    tmp = np.empty((rows, size // 2))
    h = 1
    while h < size:
        v = out.reshape(rows, size // (2 * h), 2, h)
        lo, hi = v[:, :, 0, :], v[:, :, 1, :]
        t = tmp.reshape(rows, size // (2 * h), h)
        np.add(lo, hi, out=t)
        np.subtract(lo, hi, out=hi)
        lo[...] = t
        h *= 2
    return out


def _subsample_positions(rng, shape, n: int) -> np.ndarray:
    return np.argsort(rng.random(shape), axis=1)[:, :n]


def degree_rates(inst: DegreeInstance, n: int, m: int, taus, trials: int, seed: int, stream: int) -> dict:
    """Acceptance rates per threshold for clean draws and each adversary, plus x* counts."""
    modes = ("identity", "star", "full")
    hits = {key: np.zeros(len(taus)) for key in ("clean",) + modes}
    star_counts = np.empty(trials, dtype=np.int64)
    lo = 0
    for b, size in _blocks(trials):
        rng = np.random.default_rng(np.random.SeedSequence([seed, stream, b]))
        clean = inst.draw(rng, (size, n))
        x = inst.draw(rng, (size, m))
        pos = _subsample_positions(rng, x.shape, n)
        star_counts[lo : lo + size] = (x == inst.star).sum(axis=1)
        lo += size
        for i, tau in enumerate(taus):
            hits["clean"][i] += correlation_test(clean, tau, inst.pop, inst.d).sum()
            centers = inst.best_centers(x, (inst.d - tau) // 2)
            for mode in modes:
                sub = np.take_along_axis(inst.corrupt(x, mode, tau, centers), pos, axis=1)
                hits[mode][i] += correlation_test(sub, tau, inst.pop, inst.d).sum()
    rates = {key: v / trials for key, v in hits.items()}
    rates["star_counts"] = star_counts
    return rates


def run_degree_lb(cfg: ExperimentConfig) -> Report:
    cfg = cfg.resolved()
    rep = Report(cfg.experiment, cfg.as_dict())
    inst = DegreeInstance(cfg.d, cfg.b, cfg.delta)
    n, m = cfg.n, cfg.m
    rep.measure("instance", {"c": inst.c, "budget_changes": inst.budget_changes(m), "x_star_mass": inst.c / 2})

    taus = list(range(2 - cfg.d % 2, cfg.d + 1, 2))  # inner products share the parity of d
    cal = degree_rates(inst, n, m, taus, cfg.calibration_trials, cfg.seed, 1)
    margin = 3 * math.sqrt(0.1 * 0.9 / cfg.calibration_trials)
    rep.measure("calibration", {str(t): {"clean": cal["clean"][i], "adaptive": cal["full"][i]}
                                for i, t in enumerate(taus)})
    ok = [i for i in range(len(taus)) if cal["clean"][i] <= 0.1 - margin]
    if not ok:
        rep.check("some threshold keeps clean acceptance below 0.1", 0.0, "==", 1.0,
                  note=f"d={cfg.d} is too small at n={n}")
        return rep.finish()
    best = max(ok, key=lambda i: (cal["full"][i] - cal["clean"][i], -i))
    tau = taus[best]
    rep.measure("tau", tau)
    rep.log(f"calibrated tau={tau}")

    fin = degree_rates(inst, n, m, [tau], cfg.trials, cfg.seed, 2)
    trials = cfg.trials

    def se(p):
        return math.sqrt(max(p * (1 - p), 0.0) / trials)

    clean, full, star, ident = (float(fin[k][0]) for k in ("clean", "full", "star", "identity"))
    rep.measure("rates", {"clean": clean, "adaptive_full_budget": full, "adaptive_x_star_only": star,
                          "identity": ident})
    rep.check("adaptive acceptance", full, ">=", 0.9, 3 * se(full), stderr=se(full))
    rep.check("clean acceptance", clean, "<=", 0.1, 3 * se(clean), stderr=se(clean))
    rep.check("separation", full - clean, ">=", 0.6, 3 * math.hypot(se(full), se(clean)))
    rep.check("identity adversary matches clean acceptance", abs(ident - clean), "<=", 0.0,
              3 * math.hypot(se(ident), se(clean)))

    e = fin["star_counts"]
    inside, e_se = _rate((e >= m * inst.c / 4) & (e <= m * inst.c))
    rep.check("x* count within [mc/4, mc]", inside, ">=", 1 - 1 / n, 3 * e_se, stderr=e_se)
    rep.measure("x_star_count_mean", float(e.mean()))

    # Pr over a uniform u of correlating with one fixed string is a Hamming-ball fraction; against n - 1
    # strings it lies between that and n - 1 times it.  The oblivious guarantee needs it below 1/n.
    ball = float((inst.d - 2 * inst.pop >= tau).mean())
    rep.measure("uniform_point_correlation_probability", {
        "one_partner": ball, "union_bound": min(1.0, (n - 1) * ball), "reference": 1 / n,
    })

    # Oblivious probe: move the largest allowed mass (TV 1/(1+delta)) from the strings farthest from all +1 onto it.
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 3]))
    move = 1 / (1 + cfg.delta)
    mass = inst.mass.copy()
    order = np.argsort(np.where(np.arange(inst.size) == inst.star, -1, inst.pop), kind="stable")
    left = move
    for j in order:
        if j == inst.ones or left <= 0:
            continue
        take = min(mass[j], left)
        mass[j] -= take
        mass[inst.ones] += take
        left -= take
    cum = np.cumsum(mass)
    cum[-1] = 1.0
    probe = np.searchsorted(cum, rng.random((min(trials, 20_000), n)), side="right")
    rep.measure("oblivious_probe_acceptance", float(correlation_test(probe, tau, inst.pop, inst.d).mean()))
    return rep.finish()
