"""Foldy-Wouthuysen reduction, tempo operator and the velocity quadratic form."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ..opcore import (
    DEFAULT_RULES,
    DEFAULT_WINDOW,
    GaussQ,
    OperatorExpr,
    RewriteRuleSet,
    TruncationError,
    Window,
    apply_rewrites,
    commutator_with_coordinate,
    even_part,
    exp_conjugate,
    field_op,
    mass,
    matrix_op,
    min_grade,
    momentum,
    multiply,
    normal_form,
    odd_part,
    scalar,
    upper_block,
    with_window,
    zero,
)
from ..opcore import dirac
from ..opcore.expr import field as field_symbol, metric_h


class FWGradingError(RuntimeError):
    """The odd part did not become smaller after a FW step."""


def _eps(i, j, k) -> int:
    return (i - j) * (j - k) * (k - i) // 2


def build_hamiltonian(window: Window = DEFAULT_WINDOW) -> OperatorExpr:
    """H = m beta + O + E with O = (1+phi) alpha.p and
    E = m beta phi - (curl g).sigma / 4 - g.p."""
    w = window
    one = scalar(1, w)
    phi = field_op("phi", w)
    beta = matrix_op("beta", w)
    m = mass(1, w)
    alpha_p = zero(w)
    g_p = zero(w)
    for j in (1, 2, 3):
        pj = momentum(j, w)
        alpha_p = alpha_p + matrix_op(dirac.ALPHA[j], w) * pj
        g_p = g_p + field_op(f"g{j}", w) * pj
    curl_sigma = zero(w)
    for k in (1, 2, 3):
        for i in (1, 2, 3):
            for j in (1, 2, 3):
                e = _eps(k, i, j)
                if e:
                    curl_sigma = curl_sigma + (field_op(field_symbol(f"g{j}", i), w) * matrix_op(dirac.SIGMA[k], w)).scale(e)
    odd = (one + phi) * alpha_p
    even = m * beta * phi - curl_sigma.scale(Fraction(1, 4)) - g_p
    return m * beta + odd + even


@dataclass(frozen=True)
class FWResult:
    """Outcome of the FW iteration.

    ``even_hamiltonian`` is the four-component even part; ``two_component``
    gives its upper-left block.  ``odd_grades[k]`` is the smallest
    ``-mpow + field degree`` of the odd part before step ``k``.
    """

    even_hamiltonian: OperatorExpr
    generators: tuple
    residual_odd: OperatorExpr
    window: Window
    iterations: int
    odd_grades: tuple
    cleared_after: int | None
    transformed: OperatorExpr = field(repr=False, default=None)

    @property
    def two_component(self) -> OperatorExpr:
        return upper_block(self.even_hamiltonian)


def _extended(w: Window) -> Window:
    # generators for O(m^-2) odd terms live at m^-3; [iS, m beta] brings them back
    return Window(w.min_mpow - 1, w.max_hdeg)


def _check_odd(O: OperatorExpr):
    beta = matrix_op("beta", O.window)
    if multiply(multiply(beta, O), beta) != -O:
        raise FWGradingError("odd part does not anticommute with beta")


def fw_generator(odd: OperatorExpr) -> OperatorExpr:
    """S = -i beta O / (2m)."""
    w = odd.window
    return (matrix_op("beta", w) * odd * mass(-1, w)).scale(GaussQ(0, Fraction(-1, 2)))


def fw_reduce(H: OperatorExpr, max_iters: int = 4) -> FWResult:
    """Apply up to ``max_iters`` FW conjugations ``e^{iS} H e^{-iS}``."""
    w = H.window
    ext = _extended(w)
    cur = with_window(H, ext)
    generators = []
    grades = []
    cleared = None
    for k in range(max_iters):
        odd = odd_part(cur)
        visible = with_window(odd, w)
        grades.append(min_grade(visible))
        if not visible:
            cleared = k
            break
        _check_odd(odd)
        if len(grades) > 1 and grades[-2] is not None and grades[-1] <= grades[-2]:
            raise FWGradingError(
                f"odd part did not shrink at step {k}: grade {grades[-1]}; offending terms:\n{visible}"
            )
        S = fw_generator(odd)
        try:
            cur = exp_conjugate(S, cur)
        except TruncationError as exc:
            raise FWGradingError(f"odd part cannot be reduced at step {k}: {exc}; offending terms:\n{visible}") from exc
        generators.append(S)
    final = with_window(cur, w)
    residual = odd_part(final)
    if cleared is None and not residual:
        cleared = len(generators)
    return FWResult(
        even_hamiltonian=even_part(final),
        generators=tuple(generators),
        residual_odd=residual,
        window=w,
        iterations=len(generators),
        odd_grades=tuple(grades),
        cleared_after=cleared,
        transformed=final,
    )


def transform_observable(fw: FWResult, A: OperatorExpr) -> OperatorExpr:
    """U A U^dagger with U the product of the stored FW steps (first step innermost)."""
    cur = with_window(A, _extended(fw.window))
    for S in fw.generators:
        cur = exp_conjugate(S, cur)
    return with_window(cur, fw.window)


def rate_observable(window: Window = DEFAULT_WINDOW) -> OperatorExpr:
    """(1 + phi) beta, whose expectation is d tau / dt."""
    return (scalar(1, window) + field_op("phi", window)) * matrix_op("beta", window)


def tempo_operator(fw: FWResult) -> OperatorExpr:
    """Upper block of the even part of U (1+phi) beta U^dagger."""
    return upper_block(even_part(transform_observable(fw, rate_observable(fw.window))))


def tempo_squared(T: OperatorExpr, rules: RewriteRuleSet = DEFAULT_RULES) -> OperatorExpr:
    return apply_rewrites(T * T, rules)


def velocity_operator(H_fw: OperatorExpr, axis: int) -> OperatorExpr:
    """xdot^axis = i [H_FW, x^axis]."""
    return normal_form(commutator_with_coordinate(H_fw, axis).scale(GaussQ(0, 1)))


def quadratic_form(velocities, rules: RewriteRuleSet = DEFAULT_RULES) -> OperatorExpr:
    """xdot^mu g_{mu nu} xdot^nu with xdot^0 = 1, ordered as

        1 + 2 phi - sum_j (g_j xdot^j + xdot^j g_j) - sum_i xdot^i xdot^i
          + sum_ij xdot^i h_ij xdot^j
    """
    v = list(velocities)
    w = v[0].window
    out = scalar(1, w) + field_op("phi", w).scale(2)
    for j in (1, 2, 3):
        gj = field_op(f"g{j}", w)
        xj = v[j - 1]
        out = out - (gj * xj + xj * gj) - xj * xj
        for k in (1, 2, 3):
            out = out + xj * field_op(metric_h(j, k), w) * v[k - 1]
    return apply_rewrites(normal_form(out), rules)

