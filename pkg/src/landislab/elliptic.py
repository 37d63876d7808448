"""Variable-coefficient elliptic machinery: div(A grad) on a grid.

Coefficient matrices are symmetric by construction (entries a11, a12,
a22), validated against a two-sided ellipticity bound and a Lipschitz
bound on the entries.  The divergence-form operator uses a 9-point
flux stencil with harmonic-mean face coefficients on the diagonal
entries (they are bounded below by the ellipticity constant) and
arithmetic means for the sign-changing off-diagonal entry.

Three equation variants are supported:

- electric:        div(A grad u) - V u = 0
- div_magnetic:    div(A grad u) + div(W u) - V u = 0
- nondiv_magnetic: div(A grad u) - W . grad u - V u = 0
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .fields import (
    Ball,
    GridSpec,
    ScalarField,
    diff_x,
    diff_y,
    gradient,
    interior_mask,
    sup_norm,
)

VARIANTS = ("electric", "div_magnetic", "nondiv_magnetic")


class CoefficientError(ValueError):
    """Coefficient field violates a structural hypothesis."""


class HypothesisError(ValueError):
    """A validated hypothesis failed a posteriori (sign, envelope, ...)."""


class SolveError(RuntimeError):
    """Sparse solve failed; carries a rough conditioning diagnostic."""


@dataclass
class CoefficientField:
    """Symmetric matrix field A = [[a11, a12], [a12, a22]] with declared
    ellipticity constant lam (lambda) and Lipschitz bound mu."""

    a11: ScalarField
    a12: ScalarField
    a22: ScalarField
    lam: float
    mu: float
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def spec(self) -> GridSpec:
        return self.a11.spec

    def det(self) -> np.ndarray:
        if "det" not in self._cache:
            self._cache["det"] = self.a11.values * self.a22.values - self.a12.values ** 2
        return self._cache["det"]

    def eig_range(self) -> tuple[float, float]:
        tr = self.a11.values + self.a22.values
        disc = np.sqrt((self.a11.values - self.a22.values) ** 2 + 4 * self.a12.values ** 2)
        return float(np.min((tr - disc) / 2)), float(np.max((tr + disc) / 2))

    def grad_sup(self) -> float:
        out = 0.0
        for entry in (self.a11, self.a12, self.a22):
            gx, gy = gradient(entry)
            out = max(out, float(np.max(np.hypot(gx, gy))))
        return out

    def validate(self, grad_scale: float = 1.0, tol: float = 1e-9):
        """Check ellipticity lam <= eig(A) <= 1/lam and the gradient
        bound |grad a_ij| <= mu * grad_scale (grad_scale = sqrt(M) when
        validating the scaled hypothesis)."""
        if not (0 < self.lam <= 1):
            raise CoefficientError(f"lambda must be in (0, 1], got {self.lam}")
        lo, hi = self.eig_range()
        if lo < self.lam - tol:
            raise CoefficientError(f"min eigenvalue {lo:.6g} < lambda {self.lam}")
        if hi > 1.0 / self.lam + tol:
            raise CoefficientError(f"max eigenvalue {hi:.6g} > 1/lambda {1 / self.lam:.6g}")
        g = self.grad_sup()
        if g > self.mu * grad_scale + tol:
            raise CoefficientError(
                f"sup|grad a_ij| = {g:.6g} exceeds mu*scale = {self.mu * grad_scale:.6g}")
        # consequences of ellipticity: a_ii >= lam, |a_ij| <= 1/lam
        for name, entry in (("a11", self.a11), ("a22", self.a22)):
            if np.min(entry.values) < self.lam - tol:
                raise CoefficientError(f"{name} dips below lambda")
        if np.max(np.abs(self.a12.values)) > 1.0 / self.lam + tol:
            raise CoefficientError("a12 exceeds 1/lambda")
        return self

    @classmethod
    def identity(cls, spec: GridSpec) -> "CoefficientField":
        one = ScalarField.full(spec, 1.0)
        zero = ScalarField.full(spec, 0.0)
        return cls(one, zero, one, lam=1.0, mu=0.0)

    @classmethod
    def constant(cls, spec: GridSpec, a11: float, a12: float, a22: float,
                 lam: float | None = None) -> "CoefficientField":
        tr = a11 + a22
        disc = np.sqrt((a11 - a22) ** 2 + 4 * a12 ** 2)
        emin, emax = (tr - disc) / 2, (tr + disc) / 2
        if emin <= 0:
            raise CoefficientError("constant matrix is not positive definite")
        if lam is None:
            lam = min(emin, 1.0 / emax, 1.0)
        return cls(ScalarField.full(spec, a11), ScalarField.full(spec, a12),
                   ScalarField.full(spec, a22), lam=lam, mu=0.0)


@dataclass
class PotentialField:
    """Zeroth/first-order coefficients: V >= 0 with sup bound M (or C1*M),
    optional vector potential W with sup bound sqrt(M) (or sqrt(C1*M))."""

    V: ScalarField
    M: float
    W1: ScalarField | None = None
    W2: ScalarField | None = None
    C0: float = 1.0   # normalization constant in the sup bound on u
    C1: float = 1.0   # scale allowance in the V/W bounds

    @property
    def spec(self) -> GridSpec:
        return self.V.spec

    def has_W(self) -> bool:
        return self.W1 is not None

    def W_values(self) -> tuple[np.ndarray, np.ndarray]:
        if self.W1 is None:
            z = np.zeros(self.spec.shape)
            return z, z
        return self.W1.values, self.W2.values

    def validate(self, tol: float = 1e-9):
        if self.M < 1:
            raise HypothesisError(f"M must be >= 1, got {self.M}")
        if np.min(self.V.values) < -tol:
            raise HypothesisError("V must be nonnegative")
        if np.max(self.V.values) > self.C1 * self.M + tol:
            raise HypothesisError("sup V exceeds C1*M")
        if self.has_W():
            w1, w2 = self.W_values()
            wsup = float(np.max(np.hypot(w1, w2)))
            if wsup > np.sqrt(self.C1 * self.M) + tol:
                raise HypothesisError("sup|W| exceeds sqrt(C1*M)")
        return self

    @classmethod
    def zero(cls, spec: GridSpec, M: float = 1.0) -> "PotentialField":
        return cls(ScalarField.full(spec, 0.0), M=M)


# ----------------------------------------------------------------------
# discrete operators

def _harmonic(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return 2.0 * a * b / (a + b)


def _face_coefficients(A: CoefficientField):
    a11, a12, a22 = A.a11.values, A.a12.values, A.a22.values
    ax = _harmonic(a11[:, :-1], a11[:, 1:])     # x-faces, shape (ny+1, nx)
    ay = _harmonic(a22[:-1, :], a22[1:, :])     # y-faces, shape (ny, nx+1)
    bx = 0.5 * (a12[:, :-1] + a12[:, 1:])
    by = 0.5 * (a12[:-1, :] + a12[1:, :])
    return ax, ay, bx, by


def _interior_indices(spec: GridSpec):
    nxp, nyp = spec.nx + 1, spec.ny + 1
    I, J = np.meshgrid(np.arange(1, spec.nx), np.arange(1, spec.ny))
    return (J * nxp + I).ravel(), I, J


def divergence_form_matrix(A: CoefficientField) -> sp.csr_matrix:
    """Sparse div(A grad) on full-grid vectors; rows are populated only
    for interior nodes (boundary rows are zero)."""
    key = "Lmat"
    if key in A._cache:
        return A._cache[key]
    spec = A.spec
    h2 = spec.h ** 2
    ax, ay, bx, by = _face_coefficients(A)
    rows0, I, J = _interior_indices(spec)
    nxp = spec.nx + 1

    axR = ax[J, I]
    axL = ax[J, I - 1]
    ayT = ay[J, I]
    ayB = ay[J - 1, I]
    bxR = bx[J, I]
    bxL = bx[J, I - 1]
    byT = by[J, I]
    byB = by[J - 1, I]

    coef = {
        0: -(axR + axL + ayT + ayB) / h2,                       # center
        +1: axR / h2 + (byT - byB) / (4 * h2),                  # E
        -1: axL / h2 - (byT - byB) / (4 * h2),                  # W
        +nxp: ayT / h2 + (bxR - bxL) / (4 * h2),                # N
        -nxp: ayB / h2 - (bxR - bxL) / (4 * h2),                # S
        +nxp + 1: (bxR + byT) / (4 * h2),                       # NE
        -nxp - 1: (bxL + byB) / (4 * h2),                       # SW
        +nxp - 1: -(bxL + byT) / (4 * h2),                      # NW
        -nxp + 1: -(bxR + byB) / (4 * h2),                      # SE
    }
    rows, cols, vals = [], [], []
    for off, c in coef.items():
        rows.append(rows0)
        cols.append(rows0 + off)
        vals.append(c.ravel())
    n = nxp * (spec.ny + 1)
    mat = sp.csr_matrix((np.concatenate(vals),
                         (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
    A._cache[key] = mat
    return mat


def _div_Wu_matrix(spec: GridSpec, W1: np.ndarray, W2: np.ndarray) -> sp.csr_matrix:
    """div(W u) with arithmetic-mean face values, interior rows only."""
    h = spec.h
    w1x = 0.5 * (W1[:, :-1] + W1[:, 1:])
    w2y = 0.5 * (W2[:-1, :] + W2[1:, :])
    rows0, I, J = _interior_indices(spec)
    nxp = spec.nx + 1
    wR = w1x[J, I]
    wL = w1x[J, I - 1]
    wT = w2y[J, I]
    wB = w2y[J - 1, I]
    coef = {
        0: (wR - wL + wT - wB) / (2 * h),
        +1: wR / (2 * h),
        -1: -wL / (2 * h),
        +nxp: wT / (2 * h),
        -nxp: -wB / (2 * h),
    }
    rows, cols, vals = [], [], []
    for off, c in coef.items():
        rows.append(rows0)
        cols.append(rows0 + off)
        vals.append(c.ravel())
    n = nxp * (spec.ny + 1)
    return sp.csr_matrix((np.concatenate(vals),
                          (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))


def _W_dot_grad_matrix(spec: GridSpec, W1: np.ndarray, W2: np.ndarray) -> sp.csr_matrix:
    """W . grad u with centered differences, interior rows only."""
    h = spec.h
    rows0, I, J = _interior_indices(spec)
    nxp = spec.nx + 1
    w1 = W1[J, I]
    w2 = W2[J, I]
    coef = {
        +1: w1 / (2 * h),
        -1: -w1 / (2 * h),
        +nxp: w2 / (2 * h),
        -nxp: -w2 / (2 * h),
    }
    rows, cols, vals = [], [], []
    for off, c in coef.items():
        rows.append(rows0)
        cols.append(rows0 + off)
        vals.append(c.ravel())
    n = nxp * (spec.ny + 1)
    return sp.csr_matrix((np.concatenate(vals),
                          (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))


def variant_matrix(A: CoefficientField, P: PotentialField | None, variant: str) -> sp.csr_matrix:
    """Full interior-row matrix of the chosen equation variant."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    spec = A.spec
    mat = divergence_form_matrix(A).copy()
    if P is None:
        return mat
    if not P.spec.close_to(spec):
        raise ValueError("potential and coefficients live on different grids")
    inter = interior_mask(spec, 1).ravel()
    vdiag = np.where(inter, P.V.values.ravel(), 0.0)
    mat = mat - sp.diags(vdiag)
    if variant == "electric":
        return mat.tocsr()
    w1, w2 = P.W_values()
    if variant == "div_magnetic":
        return (mat + _div_Wu_matrix(spec, w1, w2)).tocsr()
    return (mat - _W_dot_grad_matrix(spec, w1, w2)).tocsr()


def apply_L(A: CoefficientField, u: ScalarField) -> ScalarField:
    """Discrete div(A grad u): flux stencil on interior nodes, the
    non-divergence expansion on the boundary ring (so the result keeps
    the grid shape)."""
    if not u.spec.close_to(A.spec):
        raise ValueError("field and coefficients live on different grids")
    mat = divergence_form_matrix(A)
    out = (mat @ u.values.ravel()).reshape(u.spec.shape)
    nd = apply_L_nondivergence(A, u).values
    ring = ~interior_mask(u.spec, 1)
    out[ring] = nd[ring]
    return ScalarField(u.spec, out)


def apply_L_nondivergence(A: CoefficientField, u: ScalarField) -> ScalarField:
    """a_ij d_ij u + (d_i a_ij) d_j u, assembled from repeated
    one-dimensional stencils; agrees with the flux form to O(h)."""
    h = u.spec.h
    ux = diff_x(u.values, h)
    uy = diff_y(u.values, h)
    uxx = diff_x(ux, h)
    uyy = diff_y(uy, h)
    uxy = diff_y(ux, h)
    a11, a12, a22 = A.a11.values, A.a12.values, A.a22.values
    b1 = diff_x(a11, h) + diff_y(a12, h)
    b2 = diff_x(a12, h) + diff_y(a22, h)
    vals = a11 * uxx + 2 * a12 * uxy + a22 * uyy + b1 * ux + b2 * uy
    return ScalarField(u.spec, vals)


# ----------------------------------------------------------------------
# Dirichlet solves

@dataclass
class SolveReport:
    residual_inf: float
    residual_rel: float
    unknowns: int
    variant: str


def solve_dirichlet(A: CoefficientField, P: PotentialField | None, variant: str,
                    boundary: ScalarField, rhs: ScalarField | None = None,
                    tol: float = 1e-8) -> tuple[ScalarField, SolveReport]:
    """Solve the variant equation with Dirichlet data on the rectangle edge.

    boundary supplies the edge values (interior entries are ignored);
    rhs, when given, is the interior source term of M u = rhs.
    Returns the solution on the full grid plus a residual report.
    """
    spec = A.spec
    mat = variant_matrix(A, P, variant)
    inter = interior_mask(spec, 1).ravel()
    bnd = ~inter
    g = boundary.values.ravel()
    b = np.zeros(spec.shape).ravel() if rhs is None else rhs.values.ravel().copy()

    mat_ii = mat[inter][:, inter]
    mat_ib = mat[inter][:, bnd]
    rhs_i = b[inter] - mat_ib @ g[bnd]
    try:
        lu = spla.splu(mat_ii.tocsc())
        x = lu.solve(rhs_i)
    except RuntimeError as exc:  # singular factorization
        raise SolveError(f"sparse factorization failed: {exc}; "
                         f"matrix inf-norm {spla.norm(mat_ii, np.inf):.3e}") from exc
    if not np.all(np.isfinite(x)):
        raise SolveError("solver returned non-finite values (ill-conditioned system)")

    full = g.copy()
    full[inter] = x
    u = ScalarField(spec, full.reshape(spec.shape))
    res = (mat @ full - b)[inter]
    ri = float(np.max(np.abs(res)))
    scale = float(np.max(np.abs(full))) or 1.0
    rr = ri / (scale * float(np.max(np.abs(mat.data))) if mat.nnz else 1.0)
    rep = SolveReport(residual_inf=ri, residual_rel=rr, unknowns=int(inter.sum()),
                      variant=variant)
    if rr > tol:
        raise SolveError(f"relative residual {rr:.3e} exceeds tolerance {tol:.1e}")
    return u, rep


def equation_residual(A: CoefficientField, P: PotentialField | None, variant: str,
                      u: ScalarField) -> float:
    """Sup-norm of the discrete variant equation applied to u on interior
    nodes, relative to the natural scale of the equation."""
    mat = variant_matrix(A, P, variant)
    res = (mat @ u.values.ravel()).reshape(u.spec.shape)
    inter = interior_mask(u.spec, 1)
    scale = max(float(np.max(np.abs(mat.data))) * max(u.max_abs(), 1e-300), 1e-300)
    return float(np.max(np.abs(res[inter]))) / scale


# ----------------------------------------------------------------------
# positive multiplier and log-derivative estimates

def subsolution_rate(lam: float, mu: float, variant: str,
                     v_ratio: float = 1.0, w_ratio: float = 1.0) -> float:
    """Smallest c1 >= 0 with lam*c1^2 - b*c1 - v_ratio >= 0, where
    b = 2*mu (electric) or 2*mu + w_ratio (magnetic variants), making
    exp(c1*sqrt(M)*x) a subsolution of the variant equation.  v_ratio
    and w_ratio are the realized sup V / M and sup|W| / sqrt(M)."""
    b = 2 * mu if variant == "electric" else 2 * mu + w_ratio
    if v_ratio == 0:
        return 0.0  # c1 = 0 already satisfies the inequality
    return (b + np.sqrt(b * b + 4 * lam * v_ratio)) / (2 * lam)


@dataclass
class MultiplierReport:
    c1: float
    c2: float
    sqrtM: float
    realized_C1: float
    min_phi: float
    residual_rel: float
    variant: str


def positive_multiplier(A: CoefficientField, P: PotentialField, variant: str,
                        c1: float | None = None) -> tuple[ScalarField, MultiplierReport]:
    """Positive solution of the multiplier equation on the grid.

    The electric variant uses its own equation; both magnetic variants
    use the advection form div(A grad phi) - W . grad phi - V phi = 0
    (for the divergence-form magnetic equation this is the adjoint).
    One Dirichlet solve with boundary data exp(c1 sqrt(M) x), clamped
    into the sub/supersolution envelope, then positivity and the
    exponential envelope are verified a posteriori.
    """
    sqrtM = np.sqrt(P.M)
    if c1 is None:
        w1, w2 = P.W_values()
        c1 = subsolution_rate(A.lam, A.mu, variant,
                              v_ratio=float(np.max(P.V.values)) / P.M,
                              w_ratio=float(np.max(np.hypot(w1, w2))) / sqrtM)
    spec = A.spec
    c2 = c1 * max(abs(spec.x0), abs(spec.xmax))
    X, _ = spec.nodes()
    phi1_min = float(np.exp(-c1 * sqrtM * max(abs(spec.x0), abs(spec.xmax))))
    g = np.clip(np.exp(c1 * sqrtM * X), phi1_min, np.exp(c2 * sqrtM))
    bc = ScalarField(spec, g)
    eq_variant = "electric" if variant == "electric" else "nondiv_magnetic"
    phi, rep = solve_dirichlet(A, P, eq_variant, bc)
    mn = float(np.min(phi.values))
    if mn <= 0:
        raise HypothesisError(
            f"multiplier lost positivity (min {mn:.3e}); check V >= 0 / ellipticity")
    realized = float(np.max(np.abs(np.log(phi.values)))) / sqrtM
    return phi, MultiplierReport(c1=float(c1), c2=float(c2), sqrtM=float(sqrtM),
                                 realized_C1=realized, min_phi=mn,
                                 residual_rel=rep.residual_rel, variant=variant)


@dataclass
class LogDerivativeReport:
    psi: ScalarField
    sup_grad: float
    residual_inf: float
    residual_rel: float
    region_radius: float | None


def log_derivative_report(A: CoefficientField, P: PotentialField, phi: ScalarField,
                          region_radius: float | None = None) -> LogDerivativeReport:
    """psi = log(phi), the sup of |grad psi| on the requested ball, and
    the residual of div(A grad psi) + A grad psi . grad psi (- W . grad psi) = V."""
    if np.min(phi.values) <= 0:
        raise HypothesisError("log-derivative of a non-positive field")
    psi = ScalarField(phi.spec, np.log(phi.values))
    px, py = gradient(psi)
    a11, a12, a22 = A.a11.values, A.a12.values, A.a22.values
    quad = a11 * px ** 2 + 2 * a12 * px * py + a22 * py ** 2
    res = apply_L(A, psi).values + quad - P.V.values
    if P.has_W():
        w1, w2 = P.W_values()
        res = res - (w1 * px + w2 * py)
    inner = interior_mask(phi.spec, 2)
    ri = float(np.max(np.abs(res[inner])))
    scale = max(float(np.max(np.abs(quad[inner]))), P.M, 1.0)
    grad_field = ScalarField(phi.spec, np.hypot(px, py))
    if region_radius is None:
        sg = float(np.max(grad_field.values[inner]))
    else:
        sg = sup_norm(grad_field, Ball(0.0, 0.0, region_radius))
    return LogDerivativeReport(psi=psi, sup_grad=sg, residual_inf=ri,
                               residual_rel=ri / scale, region_radius=region_radius)


# ----------------------------------------------------------------------
# determinant normalization

def normalize_det(A: CoefficientField, P: PotentialField) \
        -> tuple[CoefficientField, PotentialField]:
    """Divide A by sqrt(det A) so det = 1 pointwise; transforms the
    potentials accordingly: Vn = V / sqrt(det A) and
    Wn = A grad(1/sqrt(det A)) + W / sqrt(det A).
    The normalized matrix has ellipticity constant lam^2."""
    d = A.det()
    if np.min(d) <= 0:
        raise CoefficientError("determinant must be positive")
    s = 1.0 / np.sqrt(d)
    spec = A.spec
    At = CoefficientField(
        ScalarField(spec, A.a11.values * s),
        ScalarField(spec, A.a12.values * s),
        ScalarField(spec, A.a22.values * s),
        lam=A.lam ** 2, mu=A.mu)
    At.mu = max(A.mu, At.grad_sup() * 1.0000001)  # entries change Lipschitz scale
    sx = diff_x(s, spec.h)
    sy = diff_y(s, spec.h)
    w1, w2 = P.W_values()
    Wn1 = A.a11.values * sx + A.a12.values * sy + w1 * s
    Wn2 = A.a12.values * sx + A.a22.values * sy + w2 * s
    Vn = P.V.values * s
    c1_needed = max(float(np.max(Vn)) / P.M,
                    (float(np.max(np.hypot(Wn1, Wn2))) / np.sqrt(P.M)) ** 2, 1.0)
    Pt = PotentialField(ScalarField(spec, Vn), M=P.M,
                        W1=ScalarField(spec, Wn1), W2=ScalarField(spec, Wn2),
                        C0=P.C0, C1=c1_needed * 1.0000001)
    return At, Pt


# ----------------------------------------------------------------------
# coefficient and potential families from structured-text configuration

def _trig_bundle(spec: GridSpec, modes):
    """Sum of cos(kx*x + ky*y + phase) terms with given weights; returns
    (values, sup_bound, grad_bound)."""
    X, Y = spec.nodes()
    vals = np.zeros(spec.shape)
    supb = 0.0
    gradb = 0.0
    for (w, kx, ky, ph) in modes:
        vals += w * np.cos(kx * X + ky * Y + ph)
        supb += abs(w)
        gradb += abs(w) * np.hypot(kx, ky)
    return vals, supb, gradb


def coefficients_from_config(cfg: dict, spec: GridSpec) -> CoefficientField:
    """Build a coefficient family from a plain dict (parsed JSON).

    kinds: identity | constant | diagonal | trig | random_trig, with an
    optional "normalize_det": true to rescale onto det A = 1
    (ellipticity constant becomes lambda^2).
    """
    kind = cfg.get("kind", "identity")
    lam = float(cfg.get("lambda", 1.0))
    mu = float(cfg.get("mu", 0.0))
    if kind == "identity":
        A = CoefficientField.identity(spec)
    elif kind == "constant":
        A = CoefficientField.constant(spec, cfg["a11"], cfg.get("a12", 0.0), cfg["a22"],
                                      lam=lam if "lambda" in cfg else None)
    elif kind == "diagonal":
        A = CoefficientField.constant(spec, cfg["l1"], 0.0, cfg["l2"],
                                      lam=lam if "lambda" in cfg else None)
    elif kind in ("trig", "random_trig"):
        if kind == "trig":
            modes11 = [(cfg.get("amplitude", 0.1), cfg.get("kx", 1.0), cfg.get("ky", 0.0), 0.0)]
            modes22 = [(cfg.get("amplitude", 0.1), 0.0, cfg.get("ky", 1.0), 1.0)]
            modes12 = [(cfg.get("amplitude12", cfg.get("amplitude", 0.1) / 2),
                        cfg.get("kx", 1.0), cfg.get("ky", 1.0), 0.5)]
        else:
            rng = np.random.default_rng(int(cfg.get("seed", 0)))
            nmodes = int(cfg.get("modes", 3))
            kmax = float(cfg.get("kmax", 1.5))

            def draw():
                return [(rng.uniform(0.5, 1.0), rng.uniform(-kmax, kmax),
                         rng.uniform(-kmax, kmax), rng.uniform(0, 2 * np.pi))
                        for _ in range(nmodes)]
            modes11, modes22, modes12 = draw(), draw(), draw()
        p11, s11, g11 = _trig_bundle(spec, modes11)
        p22, s22, g22 = _trig_bundle(spec, modes22)
        p12, s12, g12 = _trig_bundle(spec, modes12)
        center = 0.5 * (lam + 1.0 / lam)
        margin = 0.8 * min(center - lam, 1.0 / lam - center)
        raw_sup = max(s11, s22) + s12
        raw_grad = max(g11, g22, g12)
        eps = margin / max(raw_sup, 1e-300)
        if mu > 0:
            eps = min(eps, mu / max(raw_grad, 1e-300) / 1.05)
        eps *= float(cfg.get("amplitude_scale", 1.0))
        A = CoefficientField(
            ScalarField(spec, center + eps * p11),
            ScalarField(spec, eps * p12),
            ScalarField(spec, center + eps * p22),
            lam=lam, mu=mu if mu > 0 else eps * raw_grad * 1.05)
    else:
        raise CoefficientError(f"unknown coefficient kind {kind!r}")
    if cfg.get("normalize_det"):
        A, _ = normalize_det(A, PotentialField.zero(spec))
    return A.validate()


def potential_from_config(cfg: dict, spec: GridSpec) -> PotentialField:
    """Potential families: kinds zero | constant | random (V uniform on
    [0, M]); optional magnetic part with its own kind and seed."""
    M = float(cfg.get("M", 1.0))
    kind = cfg.get("kind", "zero")
    rng = np.random.default_rng(int(cfg.get("seed", 0)))
    if kind == "zero":
        V = ScalarField.full(spec, 0.0)
    elif kind == "constant":
        V = ScalarField.full(spec, float(cfg.get("value", M)))
    elif kind == "random":
        # smooth random V in [0, M]: squared random trig, rescaled
        modes = [(rng.uniform(0.3, 1.0), rng.uniform(-2, 2), rng.uniform(-2, 2),
                  rng.uniform(0, 2 * np.pi)) for _ in range(4)]
        raw, supb, _ = _trig_bundle(spec, modes)
        V = ScalarField(spec, M * ((raw / supb + 1) / 2))
    else:
        raise HypothesisError(f"unknown potential kind {kind!r}")
    W1 = W2 = None
    wk = cfg.get("W_kind")
    if wk == "constant":
        W1 = ScalarField.full(spec, float(cfg.get("W1", 0.0)))
        W2 = ScalarField.full(spec, float(cfg.get("W2", 0.0)))
    elif wk == "random":
        s = np.sqrt(M)
        m1 = [(rng.uniform(0.3, 1.0), rng.uniform(-2, 2), rng.uniform(-2, 2),
               rng.uniform(0, 2 * np.pi)) for _ in range(3)]
        m2 = [(rng.uniform(0.3, 1.0), rng.uniform(-2, 2), rng.uniform(-2, 2),
               rng.uniform(0, 2 * np.pi)) for _ in range(3)]
        r1, s1, _ = _trig_bundle(spec, m1)
        r2, s2, _ = _trig_bundle(spec, m2)
        scale = s / np.hypot(s1, s2) / 1.01
        W1 = ScalarField(spec, scale * r1)
        W2 = ScalarField(spec, scale * r2)
    return PotentialField(V, M=M, W1=W1, W2=W2,
                          C0=float(cfg.get("C0", 1.0)),
                          C1=float(cfg.get("C1", 1.0))).validate()
