"""Invariant suite for grouped attention.

Each scheme is checked at tiny dimensions (``head_dim`` 2, float64):

* the scheme validates,
* parameter counts equal the constructed weight element counts,
* FLOP counts equal twice the multiply-accumulates of the scalar-loop oracle,
* the layer matches the scalar-loop oracle,
* permuting the pairing with the matching ``w_o`` row blocks leaves the output unchanged,
* permuting tokens permutes the output rows,
* tape gradients match central finite differences.

Per head count the reduction equivalences (GQKVA-h.1 = MQA, GQKVA-1.h = MKVA,
GQA-h = MHA, GKVA-h = MHA) and the FLOP orderings across all schemes are checked.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from ..modules.logging import python_logging_framework as plog
from .attention.accounting import attention_flops, attention_param_count, qkv_param_count
from .attention.layer import (
    AttentionWeights,
    ScaleMode,
    grouped_attention_forward,
    init_attention_weights,
)
from .attention.oracle import loop_attention
from .attention.scheme import (
    GroupingScheme,
    all_schemes_for,
    make_scheme,
    parse_scheme,
    permute_pairing,
    validate_scheme,
)
from .core import ops
from .core.gradcheck import check_gradients
from .core.tensor import DType, Tensor
from .errors import GqkvaError

logger = plog.get_logger(__name__)

EXACT_TOL = 1e-10
GRAD_TOL = 1e-6
GRAD_FLOOR = 1e-2  # gradient magnitude below which errors are measured absolutely
VERIFY_HEAD_DIM = 2
VERIFY_BATCH = 2
VERIFY_TOKENS = 3


@dataclass(frozen=True)
class CheckResult:
    check: str
    subject: str  # scheme label, or "h=<n>" for per-head-count checks
    passed: bool
    detail: str = ""
    value: Optional[float] = None


@dataclass
class VerifyReport:
    seed: int
    scale_mode: ScaleMode
    results: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def failures(self) -> list[CheckResult]:
        return [r for r in self.results if not r.passed]

    def to_text(self) -> str:
        lines = []
        for r in self.results:
            status = "PASS" if r.passed else "FAIL"
            line = f"{status}  {r.subject:<12} {r.check}"
            if r.detail:
                line += f"  ({r.detail})"
            lines.append(line)
        lines.append(
            f"{len(self.results) - len(self.failures)}/{len(self.results)} checks passed "
            f"(seed {self.seed}, scale {self.scale_mode.value})"
        )
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        doc = {
            "seed": self.seed,
            "scale_mode": self.scale_mode.value,
            "passed": self.passed,
            "results": [asdict(r) for r in self.results],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _random_input(rng: np.random.Generator, s: GroupingScheme) -> Tensor:
    return Tensor(rng.standard_normal((VERIFY_BATCH, VERIFY_TOKENS, s.d)), dtype=DType.F64)


def _weights(s: GroupingScheme, rng: np.random.Generator) -> AttentionWeights:
    # Larger than the training init so scores are not all near zero.
    w = init_attention_weights(s, rng, dtype=DType.F64, std=0.5)
    biases = {
        name: Tensor(rng.normal(0.0, 0.1, size=t.shape), dtype=DType.F64)
        for name, t in zip(AttentionWeights.names(), w.tensors())
        if name.startswith("b_")
    }
    return AttentionWeights(**{**dict(zip(AttentionWeights.names(), w.tensors())), **biases})


def _max_dev(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.abs(np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)).max())


def _closeness(check: str, subject: str, dev: float, tol: float) -> CheckResult:
    return CheckResult(check, subject, dev <= tol, f"max deviation {dev:.3e}, tol {tol:g}", dev)


def _guarded(check: str, subject: str, fn: Callable[[], CheckResult]) -> CheckResult:
    try:
        return fn()
    except GqkvaError as e:
        return CheckResult(check, subject, False, f"{type(e).__name__}: {e}")


def _permute_output_rows(w: AttentionWeights, perm: Sequence[int], hd: int) -> AttentionWeights:
    w_o = w.w_o.numpy()
    blocks = [w_o[p * hd : (p + 1) * hd] for p in perm]
    tensors = dict(zip(AttentionWeights.names(), w.tensors()))
    tensors["w_o"] = Tensor(np.concatenate(blocks, axis=0), dtype=DType.F64)
    return AttentionWeights(**tensors)


def verify_scheme(
    s: GroupingScheme, seed: int, scale_mode: ScaleMode = ScaleMode.HEAD_DIM
) -> list[CheckResult]:
    """All per-scheme checks for ``s``."""
    subject = s.label
    problems = validate_scheme(s)
    results = [
        CheckResult("scheme-valid", subject, not problems, "; ".join(problems)),
    ]
    if problems:
        return results

    rng = np.random.default_rng([seed, s.g_q, s.g_kv, s.h])
    w = _weights(s, rng)
    x = _random_input(rng, s)

    def accounting() -> CheckResult:
        built = w.element_count
        expected = attention_param_count(s, include_bias=True)
        qkv_built = sum(t.size for t in (w.w_q, w.w_k, w.w_v))
        ok = built == expected and qkv_built == qkv_param_count(s, include_bias=False)
        return CheckResult(
            "param-accounting", subject, ok, f"constructed {built}, formula {expected}"
        )

    def flops() -> CheckResult:
        macs: Counter = Counter()
        loop_attention(x.numpy()[:1], w, s, scale_mode, macs)
        report = attention_flops(VERIFY_TOKENS, s)
        expected = {
            "projection": report.projection_flops,
            "score": report.score_flops,
            "weighted_sum": report.weighted_sum_flops,
            "output_proj": report.output_proj_flops,
        }
        wrong = [k for k, v in expected.items() if 2 * macs[k] != v]
        return CheckResult(
            "flop-accounting",
            subject,
            not wrong,
            f"mismatched: {', '.join(wrong)}" if wrong else "",
        )

    def oracle() -> CheckResult:
        got = grouped_attention_forward(x, w, s, scale_mode).numpy()
        expected = loop_attention(x.numpy(), w, s, scale_mode)
        return _closeness("loop-oracle", subject, _max_dev(got, expected), EXACT_TOL)

    def permutation() -> CheckResult:
        perm = [int(p) for p in rng.permutation(s.h)]
        base = grouped_attention_forward(x, w, s, scale_mode).numpy()
        moved = grouped_attention_forward(
            x, _permute_output_rows(w, perm, s.head_dim), permute_pairing(s, perm), scale_mode
        ).numpy()
        return _closeness("pairing-permutation", subject, _max_dev(base, moved), EXACT_TOL)

    def equivariance() -> CheckResult:
        perm = rng.permutation(VERIFY_TOKENS)
        base = grouped_attention_forward(x, w, s, scale_mode).numpy()
        shuffled = Tensor(x.numpy()[:, perm, :], dtype=DType.F64)
        moved = grouped_attention_forward(shuffled, w, s, scale_mode).numpy()
        dev = _max_dev(base[:, perm, :], moved)
        return _closeness("token-equivariance", subject, dev, EXACT_TOL)

    def gradients() -> CheckResult:
        mix = Tensor(rng.standard_normal((s.d, 1)), dtype=DType.F64)

        def loss(inputs: Sequence[Tensor]) -> Tensor:
            layer = AttentionWeights.from_tensors(inputs[1:])
            out = grouped_attention_forward(inputs[0], layer, s, scale_mode)
            return ops.sum_all(ops.matmul(out, mix))

        worst = max(check_gradients(loss, [x, *w.tensors()], floor=GRAD_FLOOR))
        detail = f"max relative error {worst:.3e}, tol {GRAD_TOL:g}"
        return CheckResult("gradients", subject, worst <= GRAD_TOL, detail, worst)

    for name, fn in (
        ("param-accounting", accounting),
        ("flop-accounting", flops),
        ("loop-oracle", oracle),
        ("pairing-permutation", permutation),
        ("token-equivariance", equivariance),
        ("gradients", gradients),
    ):
        results.append(_guarded(name, subject, fn))
    return results


def verify_reductions(
    h: int, seed: int, scale_mode: ScaleMode = ScaleMode.HEAD_DIM
) -> list[CheckResult]:
    """Degenerate group counts reproduce the named schemes on identical weights."""
    d = VERIFY_HEAD_DIM * h
    subject = f"h={h}"
    pairs = (
        ("gqkva-h.1=mqa", make_scheme("gqkva", d, h, g_q=h, g_kv=1), make_scheme("mqa", d, h)),
        ("gqkva-1.h=mkva", make_scheme("gqkva", d, h, g_q=1, g_kv=h), make_scheme("mkva", d, h)),
        ("gqa-h=mha", make_scheme("gqa", d, h, g=h), make_scheme("mha", d, h)),
        ("gkva-h=mha", make_scheme("gkva", d, h, g=h), make_scheme("mha", d, h)),
    )
    results = []
    for name, grouped, plain in pairs:
        rng = np.random.default_rng([seed, h])
        w = _weights(plain, rng)
        x = _random_input(rng, plain)

        def compare(
            grouped: GroupingScheme = grouped, plain: GroupingScheme = plain
        ) -> CheckResult:
            a = grouped_attention_forward(x, w, grouped, scale_mode).numpy()
            b = grouped_attention_forward(x, w, plain, scale_mode).numpy()
            return _closeness(f"reduction {name}", subject, _max_dev(a, b), EXACT_TOL)

        results.append(_guarded(f"reduction {name}", subject, compare))
    return results


def verify_flop_orderings(h: int, n_tokens: int = VERIFY_TOKENS) -> list[CheckResult]:
    """Score FLOPs equal across schemes; projection FLOPs strictly monotone in ``g_q + 2*g_kv``."""
    d = VERIFY_HEAD_DIM * h
    subject = f"h={h}"
    schemes = [parse_scheme(name, d, h) for name in all_schemes_for(h)]
    reports = {s.label: attention_flops(n_tokens, s) for s in schemes}

    score = {(r.score_flops, r.weighted_sum_flops) for r in reports.values()}
    results = [
        CheckResult("score-flops-equal", subject, len(score) == 1, f"{len(schemes)} schemes")
    ]

    bad = []
    for a in schemes:
        for b in schemes:
            wa, wb = a.g_q + 2 * a.g_kv, b.g_q + 2 * b.g_kv
            pa, pb = reports[a.label].projection_flops, reports[b.label].projection_flops
            if (wa < wb and not pa < pb) or (wa == wb and pa != pb):
                bad.append(f"{a.label} vs {b.label}")
    results.append(
        CheckResult("projection-flops-order", subject, not bad, "; ".join(bad[:3]))
    )
    return results


def run_suite(
    scheme_names: Iterable[str],
    h: int,
    seed: int,
    scale_mode: ScaleMode = ScaleMode.HEAD_DIM,
    head_counts: Optional[Iterable[int]] = None,
) -> VerifyReport:
    """Per-scheme checks for ``scheme_names`` at ``h`` heads, then per-head-count checks.

    ``head_counts`` defaults to ``{h}``. Scheme strings must already be valid
    for ``h``; parse errors propagate to the caller.
    """
    scale_mode = ScaleMode(scale_mode)
    schemes = [parse_scheme(name, VERIFY_HEAD_DIM * h, h) for name in scheme_names]
    report = VerifyReport(seed=seed, scale_mode=scale_mode)
    for s in schemes:
        report.results.extend(verify_scheme(s, seed, scale_mode))
        plog.log_debug(logger, f"{s.label} checked", {"Scheme": s.label, "Seed": seed})
    for count in sorted(set(head_counts or [h])):
        report.results.extend(verify_reductions(count, seed, scale_mode))
        report.results.extend(verify_flop_orderings(count))

    for failure in report.failures:
        plog.log_warning(
            logger, f"{failure.check} failed: {failure.detail}", {"Scheme": failure.subject}
        )
    plog.log_info(
        logger,
        f"{len(report.results) - len(report.failures)}/{len(report.results)} checks passed",
        {"Seed": seed},
    )
    return report
