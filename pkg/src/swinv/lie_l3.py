#!/usr/bin/env python3
"""
三次元リー代数 L₃ (X₁ = ∂ₜ, X₂ = スケーリング, X₃ = ∂ₓ) の演算と最適系の検証

交換関係は k = q/Ω のみに依存します．
    [X₁, X₂] = −X₁ + 4k X₃
    [X₂, X₃] = −X₃
    [X₁, X₃] = 0
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

# 一次独立性判定の相対許容誤差
DEFAULT_RANK_TOL = 1e-12
# β スキャンの格子点数
BETA_GRID_SIZE = 10_000
BETA_REFINE_ITERATIONS = 200
AUTOMORPHISM_SAMPLES = 100
AUTOMORPHISM_PARAM_RANGE = 2.0
# 交換子の反対称性と Jacobi 恒等式の検査に使う許容誤差
IDENTITY_TOL = 1e-12
AUTOMORPHISM_TOL = 1e-10


class DegenerateSubspaceError(ValueError):
    """2 本の生成子が一次従属な場合に発生するエラー"""


class Automorphism(enum.Enum):
    """内部自己同型 exp(a·ad Xᵢ)"""

    A1 = "A1"
    A2 = "A2"
    A3 = "A3"


@dataclass(frozen=True)
class GeneratorCoeffs:
    """基底 {X₁, X₂, X₃} における係数ベクトル"""

    x1: float
    x2: float
    x3: float

    def __post_init__(self) -> None:
        if not all(math.isfinite(v) for v in (self.x1, self.x2, self.x3)):
            msg = f"Generator coefficients must be finite: ({self.x1}, {self.x2}, {self.x3})"
            raise ValueError(msg)

    @classmethod
    def from_array(cls, values: np.ndarray) -> GeneratorCoeffs:
        return cls(float(values[0]), float(values[1]), float(values[2]))

    def to_array(self) -> np.ndarray:
        return np.array([self.x1, self.x2, self.x3], dtype=float)

    def __add__(self, other: GeneratorCoeffs) -> GeneratorCoeffs:
        return GeneratorCoeffs(self.x1 + other.x1, self.x2 + other.x2, self.x3 + other.x3)

    def __sub__(self, other: GeneratorCoeffs) -> GeneratorCoeffs:
        return GeneratorCoeffs(self.x1 - other.x1, self.x2 - other.x2, self.x3 - other.x3)

    def __mul__(self, scalar: float) -> GeneratorCoeffs:
        return GeneratorCoeffs(scalar * self.x1, scalar * self.x2, scalar * self.x3)

    __rmul__ = __mul__

    def __neg__(self) -> GeneratorCoeffs:
        return GeneratorCoeffs(-self.x1, -self.x2, -self.x3)

    def norm(self) -> float:
        return float(np.linalg.norm(self.to_array()))


X1 = GeneratorCoeffs(1.0, 0.0, 0.0)
X2 = GeneratorCoeffs(0.0, 1.0, 0.0)
X3 = GeneratorCoeffs(0.0, 0.0, 1.0)


@dataclass(frozen=True)
class StructureConstantsL3:
    """L₃ の構造定数 (k = q/Ω の関数)"""

    k: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.k):
            msg = f"Structure constant k must be finite: {self.k}"
            raise ValueError(msg)

    @classmethod
    def from_params(cls, q: float, omega: float) -> StructureConstantsL3:
        if omega == 0:
            msg = "omega must be nonzero"
            raise ValueError(msg)
        return cls(q / omega)

    def tensor(self) -> np.ndarray:
        """C[i, j, m]: [Xᵢ, Xⱼ] = Σₘ C[i, j, m] Xₘ"""
        c = np.zeros((3, 3, 3))
        c[0, 1] = (-1.0, 0.0, 4.0 * self.k)
        c[1, 0] = -c[0, 1]
        c[1, 2] = (0.0, 0.0, -1.0)
        c[2, 1] = -c[1, 2]
        return c


def bracket(a: GeneratorCoeffs, b: GeneratorCoeffs, sc: StructureConstantsL3) -> GeneratorCoeffs:
    """交換子 [a, b] を基底で展開して返す"""
    # NOTE: 同一ベクトルは反対称性から厳密に 0
    if a == b:
        return GeneratorCoeffs(0.0, 0.0, 0.0)
    return GeneratorCoeffs.from_array(np.einsum("i,j,ijm->m", a.to_array(), b.to_array(), sc.tensor()))


def apply_automorphism(
    which: Automorphism, a: float, v: GeneratorCoeffs, sc: StructureConstantsL3
) -> GeneratorCoeffs:
    """内部自己同型を係数ベクトルに作用させる"""
    if not math.isfinite(a):
        msg = f"Automorphism parameter must be finite: {a}"
        raise ValueError(msg)

    k = sc.k
    match which:
        case Automorphism.A1:
            return GeneratorCoeffs(v.x1 - a * v.x2, v.x2, v.x3 + 4.0 * k * a * v.x2)
        case Automorphism.A2:
            return GeneratorCoeffs(
                v.x1 * math.exp(a),
                v.x2,
                2.0 * k * v.x1 * (math.exp(-a) - math.exp(a)) + v.x3 * math.exp(-a),
            )
        case Automorphism.A3:
            return GeneratorCoeffs(v.x1, v.x2, v.x3 + a * v.x2)


def _span_basis(e1: GeneratorCoeffs, e2: GeneratorCoeffs, rank_tol: float) -> np.ndarray:
    basis = np.vstack([e1.to_array(), e2.to_array()])
    scale = float(np.max(np.abs(basis)))
    if scale == 0.0 or np.linalg.matrix_rank(basis, tol=rank_tol * scale) < 2:
        msg = f"Generators are linearly dependent: {e1}, {e2}"
        raise DegenerateSubspaceError(msg)
    return basis


def span_distance(
    target: GeneratorCoeffs, e1: GeneratorCoeffs, e2: GeneratorCoeffs, rank_tol: float = DEFAULT_RANK_TOL
) -> float:
    """target と span{e1, e2} の距離 (最小二乗射影の残差ノルム)"""
    basis = _span_basis(e1, e2, rank_tol)
    coeffs, *_ = np.linalg.lstsq(basis.T, target.to_array(), rcond=None)
    return float(np.linalg.norm(basis.T @ coeffs - target.to_array()))


def is_subalgebra(
    e1: GeneratorCoeffs,
    e2: GeneratorCoeffs,
    sc: StructureConstantsL3,
    tol: float,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> bool:
    """span{e1, e2} が交換子について閉じているかを判定する"""
    return span_distance(bracket(e1, e2, sc), e1, e2, rank_tol) <= tol


def closure_indicator(beta: float, sc: StructureConstantsL3) -> float:
    """{X₂, X₁ + βX₃} の閉包条件を表す符号付きの量 det(e1, e2, [e1, e2])"""
    e1 = X2
    e2 = X1 + beta * X3
    return float(np.linalg.det(np.vstack([e1.to_array(), e2.to_array(), bracket(e1, e2, sc).to_array()])))


def scan_closure(sc: StructureConstantsL3, tol: float, grid_size: int = BETA_GRID_SIZE) -> list[float]:
    """β を格子で走査し，{X₂, X₁ + βX₃} が閉じる β を二分法で精密化して返す"""
    span = 10.0 * abs(sc.k) + 1.0
    betas = np.linspace(-span, span, grid_size)
    values = np.array([closure_indicator(float(b), sc) for b in betas])

    roots: list[float] = []
    for i in range(grid_size - 1):
        lo, hi = float(betas[i]), float(betas[i + 1])
        g_lo, g_hi = values[i], values[i + 1]
        if g_lo == 0.0:
            roots.append(lo)
            continue
        if g_lo * g_hi >= 0.0:
            continue
        for _ in range(BETA_REFINE_ITERATIONS):
            mid = 0.5 * (lo + hi)
            g_mid = closure_indicator(mid, sc)
            if g_mid == 0.0 or mid in (lo, hi):
                lo = hi = mid
                break
            if g_lo * g_mid < 0.0:
                hi = mid
            else:
                lo, g_lo = mid, g_mid
        roots.append(0.5 * (lo + hi))
    if values[-1] == 0.0:
        roots.append(float(betas[-1]))

    return [b for b in roots if is_subalgebra(X2, X1 + b * X3, sc, tol)]


def representatives(sc: StructureConstantsL3) -> dict[str, tuple[GeneratorCoeffs, GeneratorCoeffs]]:
    """最適系の代表元"""
    return {
        "{X1,X3}": (X1, X3),
        "{X2,X1-2kX3}": (X2, X1 - 2.0 * sc.k * X3),
        "{X2,X3}": (X2, X3),
    }


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


@dataclass
class LieCheckReport:
    """最適系検証の結果"""

    k: float
    checks: list[CheckResult] = field(default_factory=list)

    def add(self, name: str, passed: bool, detail: str) -> None:
        self.checks.append(CheckResult(name, passed, detail))

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def first_failure(self) -> CheckResult | None:
        return next((check for check in self.checks if not check.passed), None)

    def to_text(self) -> str:
        lines = [f"lie-check k={self.k:.17g}"]
        lines += [
            f"{'PASS' if check.passed else 'FAIL'} {check.name}: {check.detail}" for check in self.checks
        ]
        failure = self.first_failure
        lines.append("result: PASS" if failure is None else f"result: FAIL ({failure.name})")
        return "\n".join(lines) + "\n"


def _random_coeffs(rng: np.random.Generator) -> GeneratorCoeffs:
    return GeneratorCoeffs.from_array(rng.uniform(-1.0, 1.0, 3))


def verify_optimal_system(sc: StructureConstantsL3, tol: float, seed: int = 0) -> LieCheckReport:
    """交換関係・最適系の代表元・β スキャン・自己同型の性質を検証する"""
    rng = np.random.default_rng(seed)
    report = LieCheckReport(k=sc.k)

    worst_antisym = 0.0
    worst_jacobi = 0.0
    for _ in range(AUTOMORPHISM_SAMPLES):
        a, b, c = (_random_coeffs(rng) for _ in range(3))
        worst_antisym = max(worst_antisym, (bracket(a, b, sc) + bracket(b, a, sc)).norm())
        jacobi = (
            bracket(a, bracket(b, c, sc), sc)
            + bracket(b, bracket(c, a, sc), sc)
            + bracket(c, bracket(a, b, sc), sc)
        )
        worst_jacobi = max(worst_jacobi, jacobi.norm())
    report.add("antisymmetry", worst_antisym < IDENTITY_TOL, f"max residual {worst_antisym:.3e}")
    report.add("jacobi", worst_jacobi < IDENTITY_TOL, f"max residual {worst_jacobi:.3e}")

    for name, (e1, e2) in representatives(sc).items():
        distance = span_distance(bracket(e1, e2, sc), e1, e2)
        report.add(f"closed {name}", distance <= tol, f"distance {distance:.3e}")

    roots = scan_closure(sc, tol)
    expected = -2.0 * sc.k
    unique = len(roots) == 1 and abs(roots[0] - expected) <= max(tol, 1e-12 * (1.0 + abs(expected)))
    report.add(
        "beta-scan",
        unique,
        f"closed at {', '.join(f'{b:.12g}' for b in roots) or 'none'} (expected {expected:.12g})",
    )

    for which in Automorphism:
        worst = 0.0
        worst_group = 0.0
        for _ in range(AUTOMORPHISM_SAMPLES):
            u, v = _random_coeffs(rng), _random_coeffs(rng)
            a, b = rng.uniform(-AUTOMORPHISM_PARAM_RANGE, AUTOMORPHISM_PARAM_RANGE, 2)
            lhs = bracket(apply_automorphism(which, a, u, sc), apply_automorphism(which, a, v, sc), sc)
            rhs = apply_automorphism(which, a, bracket(u, v, sc), sc)
            worst = max(worst, (lhs - rhs).norm())

            composed = apply_automorphism(which, b, apply_automorphism(which, a, u, sc), sc)
            direct = apply_automorphism(which, a + b, u, sc)
            worst_group = max(worst_group, (composed - direct).norm() / (1.0 + direct.norm()))
        report.add(f"automorphism {which.value}", worst < AUTOMORPHISM_TOL, f"max residual {worst:.3e}")
        report.add(
            f"group law {which.value}", worst_group < AUTOMORPHISM_TOL, f"max residual {worst_group:.3e}"
        )

    return report
