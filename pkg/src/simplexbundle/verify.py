"""Acceptance checks, runnable from the CLI (``verify``) and from pytest.

Each check returns a :class:`CheckResult` with the measured quantity, the
threshold it is held to, and the wall time against its budget. Randomized
draws come from one ``numpy.random.Generator`` seeded by the caller.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .curves import score
from .errors import SimplexError
from .natgrad import (
    cramer_rao_gap,
    directional_derivative_check,
    entropy,
    entropy_functional,
    entropy_production,
    expectation_functional,
    natural_gradient_flow,
)
from .poly import (
    Indeterminate,
    P,
    Polynomial,
    binomial_score_relation,
    derive,
    face_product,
    model_tangent_system,
    parse_polynomial,
    relation_residual,
)
from .simplex import (
    BundleElement,
    ContrastVector,
    ProbabilityVector,
    SampleSpace,
    center,
    contrast_basis,
    make_distribution,
)
from .transport import ExpGeodesic, duality_gap, e_transport, kl, m_transport
from .zoo import (
    COLLAPSED_2X2,
    TABLE_2X2,
    GibbsSpec,
    MixtureSpec,
    entropy_curve,
    get_curve,
    gibbs_curve,
    independence_curve,
    line_model,
    marginal_homogeneity_curve,
    mixture_curve,
    ZOO,
)


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: str
    expected: str
    seconds: float = 0.0
    budget: float = math.inf

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] {self.name}: measured {self.measured}; expected {self.expected}; "
                f"{self.seconds:.3f}s (budget {self.budget:g}s)")


# -- random draws --------------------------------------------------------------

def random_distribution(rng: np.random.Generator, d: int, min_support: int = 1,
                        mask: np.ndarray | None = None) -> ProbabilityVector:
    if mask is None:
        k = int(rng.integers(min_support, d + 1))
        mask = np.zeros(d, bool)
        mask[rng.choice(d, size=k, replace=False)] = True
    w = np.where(mask, rng.dirichlet(np.ones(d)) + 0.05, 0.0)
    return make_distribution(SampleSpace.of_size(d), w / w.sum())


def nested_masks(rng: np.random.Generator, d: int, n: int) -> list[np.ndarray]:
    """``n`` increasing support masks, the smallest with at least one cell."""
    order = rng.permutation(d)
    sizes = np.sort(rng.integers(1, d + 1, size=n))
    out = []
    for k in sizes:
        m = np.zeros(d, bool)
        m[order[:k]] = True
        out.append(m)
    return out


def random_element(rng: np.random.Generator, p: ProbabilityVector, scale: float = 1.0):
    return center(scale * rng.normal(size=p.space.d), p)


def _timed(name: str, budget: float, body: Callable[[], tuple]) -> CheckResult:
    start = time.perf_counter()
    try:
        passed, measured, expected = body()
    except SimplexError as exc:
        passed, measured, expected = False, f"error {type(exc).__name__}: {exc}", "no error"
    elapsed = time.perf_counter() - start
    return CheckResult(name, bool(passed) and elapsed < budget, measured, expected,
                       elapsed, budget)


# -- checks ------------------------------------------------------------------

def check_score_identity(rng):
    def body():
        worst_id = worst_mean = 0.0
        for name in ZOO:
            curve = get_curve(name)
            ts = list(curve.interior_grid(200))
            if name == "entropy3":
                ts.append(0.5)
            for t in ts:
                res = score(curve, t)
                gam = res.base.weights
                worst_id = max(worst_id, float(np.max(np.abs(res.velocity.values - res.values * gam))))
                worst_mean = max(worst_mean, abs(float(np.dot(gam, res.values))))
        ok = worst_id <= 1e-8 and worst_mean <= 1e-8
        return ok, f"max|v - s*g|={worst_id:.2e}, max|E s|={worst_mean:.2e}", "both <= 1e-8"
    return _timed("score-identity", 1.0, body)


def _entropy3_closed_form(t: float) -> float:
    # Minus the closed-form production expression; an independent route to dH/dt.
    return -(math.log(t) + 2 * (t - 0.5) * math.log((t - 0.5) ** 2)
             - 2 * t * math.log(0.75 - t * t))


def check_entropy_compensation(rng):
    def body():
        curve = entropy_curve()
        at_hit = abs(entropy_production(curve, 0.5))
        worst = max(abs(entropy_production(curve, t) - _entropy3_closed_form(t))
                    for t in (0.15, 0.3, 0.45, 0.6, 0.75))
        ok = at_hit <= 1e-9 and worst <= 1e-9
        return ok, f"|dH/dt(1/2)|={at_hit:.2e}, max closed-form gap={worst:.2e}", "both <= 1e-9"
    return _timed("entropy-compensation", 1.0, body)


def check_gibbs_boundary(rng):
    def body():
        curve = gibbs_curve(GibbsSpec([0, 0, 1], [0, 1, 1.8]))
        at_zero = curve.point(0.0).weights
        exact = bool(np.array_equal(at_zero, [0.5, 0.5, 0.0]))
        contact = all(curve.point(b).weights[2] <= math.exp(-1.0 / b ** 2) for b in (0.1, 0.2, 0.3))
        hi = curve.point(50.0).weights
        lo = curve.point(-50.0).weights
        vertices = hi[2] >= 1 - 1e-8 and lo[0] >= 1 - 1e-8
        ok = exact and contact and vertices
        return (ok, f"gamma(0)={at_zero.tolist()}, contact={contact}, "
                    f"w3(50)={hi[2]:.12f}, w1(-50)={lo[0]:.12f}",
                "gamma(0)=(1/2,1/2,0), w3<=exp(-1/b^2), dominant >= 1-1e-8")
    return _timed("gibbs-boundary", 1.0, body)


def rk4_geodesic(base: np.ndarray, u: np.ndarray, t_end: float, n_steps: int) -> np.ndarray:
    """Integrate ``q' = (u - E_q u) q`` row-wise with classical RK4; returns all states."""
    h = t_end / n_steps

    def f(q):
        return (u - np.sum(q * u, axis=-1, keepdims=True)) * q

    q = base.copy()
    states = [q.copy()]
    for _ in range(n_steps):
        k1 = f(q)
        k2 = f(q + 0.5 * h * k1)
        k3 = f(q + 0.5 * h * k2)
        k4 = f(q + h * k3)
        q = q + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        states.append(q.copy())
    return np.array(states)


def check_geodesic(rng, n_pairs: int = 50):
    def body():
        d = 5
        geos = []
        for _ in range(n_pairs):
            p = random_distribution(rng, d, min_support=2)
            geos.append(ExpGeodesic(p, random_element(rng, p)))
        base = np.array([g.base.weights for g in geos])
        u = np.array([g.direction.score for g in geos])
        n_steps, every = 2000, 100
        worst_rk = worst_kl = 0.0
        for t_end in (2.0, -2.0):
            states = rk4_geodesic(base, u, t_end, n_steps)
            for k in range(0, n_steps + 1, every):
                t = t_end * k / n_steps
                for i, g in enumerate(geos):
                    q = g.point(t)
                    worst_rk = max(worst_rk, float(np.max(np.abs(q.weights - states[k, i]))))
                    worst_kl = max(worst_kl, abs(g.psi(t) - kl(g.base, q)))
        ok = worst_rk <= 1e-8 and worst_kl <= 1e-10
        return ok, f"max|closed - RK4|={worst_rk:.2e}, max|psi - KL|={worst_kl:.2e}", \
            "<= 1e-8 and <= 1e-10"
    return _timed("geodesic", 5.0, body)


def check_transport(rng, n_draws: int = 1000):
    def body():
        worst = 0.0
        for _ in range(n_draws):
            d = int(rng.integers(2, 7))
            m1, m2, m3 = nested_masks(rng, d, 3)
            p, q, r = (random_distribution(rng, d, mask=m) for m in (m1, m2, m3))
            u = random_element(rng, p)
            w = random_element(rng, q)
            gaps = [
                np.max(np.abs(e_transport(p, p, u).score - u.score)),
                np.max(np.abs(m_transport(p, p, u).score - u.score)),
                # m-transport composes along growing supports p <= q <= r
                np.max(np.abs(m_transport(q, r, m_transport(p, q, u)).score
                              - m_transport(p, r, u).score)),
                duality_gap(p, q, u, w),
            ]
            # e-transport composes along shrinking supports r >= q >= p
            v = random_element(rng, r)
            gaps.append(np.max(np.abs(e_transport(q, p, e_transport(r, q, v)).score
                                      - e_transport(r, p, v).score)))
            worst = max(worst, float(max(gaps)))
        return worst <= 1e-10, f"max gap={worst:.2e} over {n_draws} draws", "<= 1e-10"
    return _timed("transport", 2.0, body)


def natural_gradient_matrix_curves():
    mix = MixtureSpec(make_distribution(3, [0.5, 0.5, 0.0]),
                      make_distribution(3, [0.25, 0.25, 0.5]))
    return [
        (line_model(), np.linspace(0.05, 0.45, 9)),
        (entropy_curve(), np.linspace(0.15, 0.75, 9)),
        (mixture_curve(mix), np.linspace(0.05, 0.95, 9)),
        (gibbs_curve(GibbsSpec([0, 0, 1], [0, 1, 1.8])), np.linspace(-2.9, 2.9, 8)),
    ]


def check_natural_gradient(rng):
    def body():
        functionals = [expectation_functional([1.0, -0.5, 2.0]), entropy_functional()]
        worst = 0.0
        for curve, grid in natural_gradient_matrix_curves():
            for G in functionals:
                for t in grid:
                    worst = max(worst, directional_derivative_check(G, curve, float(t)))
        return worst <= 1e-6, f"max |dG/dt - <grad G, s>|={worst:.2e}", "<= 1e-6"
    return _timed("natural-gradient", 5.0, body)


def check_cramer_rao(rng, n_draws: int = 1000):
    def body():
        lhs, rhs = cramer_rao_gap(line_model(), [1.0, 0.0, 0.0], 0.25)
        worked = (lhs, rhs) == (1.0, 3.0)
        curves = [get_curve(name) for name in ZOO]
        worst = -math.inf
        for _ in range(n_draws):
            curve = curves[int(rng.integers(len(curves)))]
            a, b = curve.domain
            t = float(rng.uniform(a + 0.05 * (b - a), b - 0.05 * (b - a)))
            g = rng.normal(size=curve.space.d) * rng.exponential(3.0)
            l, r = cramer_rao_gap(curve, g, t)
            worst = max(worst, l - r)
        ok = worked and worst <= 1e-10
        return ok, f"worked=({lhs}, {rhs}), max(lhs - rhs)={worst:.2e}", \
            "(1, 3) exactly and lhs - rhs <= 1e-10"
    return _timed("cramer-rao", 2.0, body)


def check_entropy_flow(rng):
    def body():
        p0 = make_distribution(3, [0.7, 0.3, 0.0])
        traj = natural_gradient_flow(entropy_functional(), p0, step=0.5, n_steps=500)
        final = traj.final.weights
        dist = float(np.max(np.abs(final - [0.5, 0.5, 0.0])))
        support_ok = all(np.array_equal(p.support, p0.support) for _, p, _ in traj.points)
        values = [entropy(p) for _, p, _ in traj.points]
        monotone = all(b >= a for a, b in zip(values, values[1:]))
        ok = traj.converged and dist <= 1e-6 and support_ok and monotone
        return ok, (f"dist={dist:.2e} after {len(traj) - 1} steps, support invariant={support_ok}, "
                    f"monotone={monotone}"), "dist <= 1e-6, invariant support, monotone H"
    return _timed("entropy-flow", 1.0, body)


def random_polynomial(rng: random.Random, variables, max_terms: int = 4,
                      max_degree: int = 3) -> Polynomial:
    terms = []
    for _ in range(rng.randint(0, max_terms)):
        mono = [(v, rng.randint(1, max_degree)) for v in variables if rng.random() < 0.4]
        coef = Fraction(rng.randint(-9, 9), rng.randint(1, 5))
        terms.append((tuple(mono), coef))
    return Polynomial(terms)


def _algebra_golden() -> list[tuple[str, bool]]:
    s4 = TABLE_2X2
    out = []
    indep = binomial_score_relation({"11": 1, "22": 1}, {"12": 1, "21": 1}, s4)
    out.append(("independence relation", indep.as_polynomial() == parse_polynomial(
        "s11 - s12 - s21 + s22", s4)))
    mh = binomial_score_relation({"11": 1, "22": 1}, {"12": 2}, s4)
    out.append(("marginal homogeneity relation", mh.as_polynomial() == parse_polynomial(
        "s11 - 2*s12 + s22", s4)))
    fp = face_product(contrast_basis(s4, s4.labels), ["x", "y", "z"])
    target = parse_polynomial("x*y*z*(x+y+z)")
    out.append(("face product xyz(x+y+z) up to sign", fp == target or fp == -target))
    primed = [ContrastVector(s4, v) for v in ([1, -1, 1, -1], [1, 1, -1, -1], [1, -1, -1, 1])]
    out.append(("face product of the Markov-move basis", face_product(primed, ["x", "y", "z"])
                == parse_polynomial("(x+y+z)*(-x+y-z)*(x-y-z)*(-x-y+z)")))
    s3 = SampleSpace.of_size(3)
    system = model_tangent_system(["p1 - p2", "p3 + 2*p1 - 1"], s3)
    out.append(("line tangent system", all(parse_polynomial(f, s3) in system
                                           for f in ("s1*p1 - s2*p2", "s3*p3 + 2*s1*p1"))))
    return out


def check_algebra(rng, n_random: int = 500):
    def body():
        golden = _algebra_golden()
        prng = random.Random(int(rng.integers(2**31)))
        variables = [Indeterminate(P, c, i) for i, c in enumerate(("1", "2", "3", "4"))]
        leibniz_failures = 0
        for _ in range(n_random):
            f = random_polynomial(prng, variables)
            g = random_polynomial(prng, variables)
            if derive(f * g) != derive(f) * g + f * derive(g):
                leibniz_failures += 1
        bad = [name for name, ok in golden if not ok]
        ok = not bad and leibniz_failures == 0
        return ok, f"golden failures={bad or 'none'}, Leibniz failures={leibniz_failures}/{n_random}", \
            "all golden identities, exact Leibniz rule"
    return _timed("algebra", 5.0, body)


def _sigmoid_path(rng: np.random.Generator):
    a, b = rng.uniform(-1.5, 1.5), rng.uniform(-3, 3)

    def path(t):
        return 1.0 / (1.0 + math.exp(-(a + b * t)))

    def deriv(t):
        y = path(t)
        return b * y * (1 - y)

    return path, deriv


def check_relations(rng, n_curves: int = 20):
    def body():
        grid = np.linspace(0.05, 0.95, 15)
        worst = 0.0
        indep_form = binomial_score_relation([1, 0, 0, 1], [0, 1, 1, 0], TABLE_2X2)
        mh_form = binomial_score_relation([1, 0, 1], [0, 2, 0], COLLAPSED_2X2)
        for _ in range(n_curves):
            (rp, rd), (cp, cd) = _sigmoid_path(rng), _sigmoid_path(rng)
            curve = independence_curve(rp, cp, rd, cd)
            worst = max(worst, relation_residual(indep_form, curve, grid))
            tp, td = _sigmoid_path(rng)
            curve = marginal_homogeneity_curve(tp, td, collapsed=True)
            worst = max(worst, relation_residual(mh_form, curve, grid))
        worst = max(worst, relation_residual(
            mh_form, marginal_homogeneity_curve(collapsed=True), np.linspace(0.1, 0.9, 17)))
        # Negative control: a mixture of two product measures leaves the variety.
        p = make_distribution(TABLE_2X2, [0.6, 0.2, 0.1, 0.1])
        q = make_distribution(TABLE_2X2, [0.1, 0.3, 0.4, 0.2])
        control = relation_residual(indep_form, mixture_curve(MixtureSpec(p, q)), grid)
        ok = worst <= 1e-8 and control >= 1e-2
        return ok, f"max residual={worst:.2e}, negative control={control:.3f}", \
            "residual <= 1e-8, control >= 1e-2"
    return _timed("relations", 2.0, body)


CHECKS = {
    "score-identity": check_score_identity,
    "entropy-compensation": check_entropy_compensation,
    "gibbs-boundary": check_gibbs_boundary,
    "geodesic": check_geodesic,
    "transport": check_transport,
    "natural-gradient": check_natural_gradient,
    "cramer-rao": check_cramer_rao,
    "entropy-flow": check_entropy_flow,
    "algebra": check_algebra,
    "relations": check_relations,
}


def run_checks(only=None, seed: int = 42) -> list[CheckResult]:
    names = list(only) if only else list(CHECKS)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise KeyError(f"unknown checks {unknown}; available: {', '.join(CHECKS)}")
    results = []
    for i, name in enumerate(names):
        rng = np.random.default_rng([seed, list(CHECKS).index(name)])
        results.append(CHECKS[name](rng))
    return results
