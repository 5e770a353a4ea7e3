"""Sequential selection of ``(K_s, K_r)`` over ordered candidate pairs.

Candidates are ordered by total ``k_s + k_r`` and, within equal totals, by
``k_s``.  Two stopping rules scan this order:

* level rule: stop at the first candidate whose statistic is below ``t_n``;
* ratio rule: stop at ``(1, 1)`` if its statistic is below ``t_n``, otherwise
  at the first ``m >= 2`` with ``|T(m-1) / T(m)| > tau_n``.

Both return the last candidate ``(K_cand, K_cand)`` when nothing triggers.
Statistics are evaluated lazily; nothing after the stopping index is
computed.
"""
import math
from dataclasses import dataclass, field

from mlnet.exceptions import DegenerateInputError
from mlnet.gof import StatisticEvaluator

__all__ = [
    "CandidatePair",
    "SelectionConfig",
    "TraceEntry",
    "SelectionTrace",
    "candidate_sequence",
    "index_of_pair",
    "ratio_sequence",
    "ratio",
    "level_scan",
    "ratio_scan",
    "mldigof_estimate",
    "mlrdigof_estimate",
]


@dataclass(frozen=True, order=False)
class CandidatePair:
    k_s: int
    k_r: int

    def __post_init__(self):
        if self.k_s < 1 or self.k_r < 1:
            raise DegenerateInputError(f"community numbers must be positive: {self}")

    def _key(self):
        return (self.k_s + self.k_r, self.k_s)

    def __lt__(self, other):
        return self._key() < other._key()

    def __le__(self, other):
        return self._key() <= other._key()

    def __iter__(self):
        return iter((self.k_s, self.k_r))

    def __str__(self):
        return f"({self.k_s},{self.k_r})"


def default_t_n(n, exponent=0.2):
    return n ** (-exponent)


def default_tau_n(n, scale=8.0):
    return scale * math.log(n)


def default_k_cand(n):
    return max(1, math.floor(math.sqrt(n / math.log(n))))


@dataclass(frozen=True)
class SelectionConfig:
    """Thresholds for the two selectors; ``None`` means the n-dependent default.

    Defaults: ``t_n = n**-0.2``, ``tau_n = 8 ln n``,
    ``K_cand = floor(sqrt(n / ln n))``.
    """

    t_n: float = None
    tau_n: float = None
    k_cand: int = None
    seed: int = 0

    def __post_init__(self):
        if self.t_n is not None and not self.t_n > 0:
            raise DegenerateInputError("t_n must be positive")
        if self.tau_n is not None and not self.tau_n > 0:
            raise DegenerateInputError("tau_n must be positive")
        if self.k_cand is not None and self.k_cand < 1:
            raise DegenerateInputError("K_cand must be at least 1")

    @classmethod
    def from_parameters(cls, n, t_exponent=None, tau_scale=None, tau_const=None, k_cand=None, seed=0):
        """Build a resolved config from threshold parameters (``t_n = n**-eps`` etc.)."""
        if tau_scale is not None and tau_const is not None:
            raise DegenerateInputError("give at most one of tau_scale and tau_const")
        t_n = default_t_n(n, t_exponent) if t_exponent is not None else None
        if tau_const is not None:
            tau_n = float(tau_const)
        elif tau_scale is not None:
            tau_n = default_tau_n(n, tau_scale)
        else:
            tau_n = None
        return cls(t_n, tau_n, k_cand, seed).resolve(n)

    def resolve(self, n):
        if n < 2:
            raise DegenerateInputError("selection needs n >= 2")
        return SelectionConfig(
            self.t_n if self.t_n is not None else default_t_n(n),
            self.tau_n if self.tau_n is not None else default_tau_n(n),
            self.k_cand if self.k_cand is not None else default_k_cand(n),
            self.seed,
        )


@dataclass(frozen=True)
class TraceEntry:
    m: int
    pair: CandidatePair
    t_hat: float
    ratio: float = None
    stopped: bool = False


@dataclass
class SelectionTrace:
    algorithm: str
    entries: list = field(default_factory=list)
    chosen: CandidatePair = None
    stop_reason: str = None
    t_n: float = None
    tau_n: float = None
    k_cand: int = None

    @property
    def statistics(self):
        return [e.t_hat for e in self.entries]


def candidate_sequence(k_cand):
    """All pairs in ``{1..k_cand}^2`` in search order, as a list."""
    if k_cand < 1:
        raise DegenerateInputError("K_cand must be at least 1")
    seq = []
    for total in range(2, 2 * k_cand + 1):
        for k_s in range(max(1, total - k_cand), min(k_cand, total - 1) + 1):
            seq.append(CandidatePair(k_s, total - k_s))
    return seq


def index_of_pair(pair, k_cand):
    """1-based position of ``pair`` in ``candidate_sequence(k_cand)``."""
    k_s, k_r = pair
    if not (1 <= k_s <= k_cand and 1 <= k_r <= k_cand):
        raise DegenerateInputError(f"pair ({k_s}, {k_r}) outside 1..{k_cand}")
    total = k_s + k_r
    # pairs with a smaller total
    before = 0
    for t in range(2, total):
        before += min(k_cand, t - 1) - max(1, t - k_cand) + 1
    return before + (k_s - max(1, total - k_cand)) + 1


def ratio(prev, cur):
    """``|prev / cur|``; a zero denominator gives ``inf``."""
    if cur == 0.0:
        return math.inf
    return abs(prev / cur)


def ratio_sequence(t_hats):
    """Ratios ``r_2..r_M`` of consecutive statistics."""
    t_hats = list(t_hats)
    if len(t_hats) < 2:
        raise DegenerateInputError("need at least two statistics")
    return [ratio(t_hats[i - 1], t_hats[i]) for i in range(1, len(t_hats))]


def _finish(trace, pairs, stop_index, reason):
    if stop_index is not None:
        e = trace.entries[stop_index - 1]
        trace.entries[stop_index - 1] = TraceEntry(e.m, e.pair, e.t_hat, e.ratio, True)
        trace.chosen = pairs[stop_index - 1]
    else:
        trace.chosen = pairs[-1]
    trace.stop_reason = reason
    return trace.chosen, trace


def _record(trace, m, pair, value):
    r = ratio(trace.entries[-1].t_hat, value) if trace.entries else None
    trace.entries.append(TraceEntry(m, pair, value, r))
    return r


def level_scan(statistic, t_n, k_cand):
    """Level-crossing rule on a statistic callable ``statistic(pair) -> float``."""
    pairs = candidate_sequence(k_cand)
    trace = SelectionTrace("mldigof", t_n=t_n, k_cand=k_cand)
    for m, pair in enumerate(pairs, start=1):
        value = float(statistic(pair))
        _record(trace, m, pair, value)
        if value < t_n:
            return _finish(trace, pairs, m, "threshold-crossed")
    return _finish(trace, pairs, None, "exhausted")


def ratio_scan(statistic, t_n, tau_n, k_cand):
    """Ratio rule on a statistic callable ``statistic(pair) -> float``."""
    pairs = candidate_sequence(k_cand)
    trace = SelectionTrace("mlrdigof", t_n=t_n, tau_n=tau_n, k_cand=k_cand)
    value = float(statistic(pairs[0]))
    _record(trace, 1, pairs[0], value)
    if value < t_n:
        return _finish(trace, pairs, 1, "threshold-crossed")
    for m in range(2, len(pairs) + 1):
        r = _record(trace, m, pairs[m - 1], float(statistic(pairs[m - 1])))
        if r > tau_n:
            return _finish(trace, pairs, m, "ratio-peak")
    return _finish(trace, pairs, None, "exhausted")


def _evaluator(net, cfg, evaluator):
    if evaluator is None:
        evaluator = StatisticEvaluator(net, cfg.seed)
    return evaluator


def mldigof_estimate(net, cfg=None, evaluator=None):
    """Level-crossing estimate of ``(K_s, K_r)``.

    Parameters
    ----------
    net : MultiLayerNetwork
    cfg : SelectionConfig, optional
        Unset thresholds take their ``n``-dependent defaults.
    evaluator : StatisticEvaluator, optional
        Pass one to share cached statistics with other selectors.

    Returns
    -------
    (CandidatePair, SelectionTrace)
    """
    cfg = (cfg or SelectionConfig()).resolve(net.n)
    ev = _evaluator(net, cfg, evaluator)
    return level_scan(ev, cfg.t_n, cfg.k_cand)


def mlrdigof_estimate(net, cfg=None, evaluator=None):
    """Ratio-rule estimate of ``(K_s, K_r)``; see :func:`mldigof_estimate`."""
    cfg = (cfg or SelectionConfig()).resolve(net.n)
    ev = _evaluator(net, cfg, evaluator)
    return ratio_scan(ev, cfg.t_n, cfg.tau_n, cfg.k_cand)
