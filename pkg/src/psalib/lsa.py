"""Finite-dimensional algebras at a point: products, pairings, cochains.

Products are stored as structure constants over a fixed basis.  The
left-symmetry check, the commutator construction, invariant pairings, the
product built from a nondegenerate closed skew form, representations, and
the scalar cochain complex with its restricted subspaces all live here.
Everything is exact Fraction arithmetic.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .exactlinalg import (
    QMatrix,
    SingularMatrixError,
    kernel_basis,
    qinvert,
    rank,
    rank_second_opinion,
)
from .report import CheckReport, Recorder

__all__ = [
    "FiniteAlgebra",
    "SkewForm",
    "RepresentationData",
    "Cochain",
    "check_left_symmetric",
    "subadjacent_lie",
    "check_invariant_form",
    "lsa_from_symplectic_lie",
    "check_representation",
    "coboundary",
    "membership_matrix",
    "restricted_basis",
    "coboundary_matrix",
    "restricted_cohomology_dims",
    "cochain_space_dim",
]


class FiniteAlgebra:
    """A bilinear product on a finite-dimensional space, as structure
    constants: product(e_a, e_b) = sum_k c[a][b][k] e_k."""

    def __init__(self, dim: int, constants, names=None):
        self.dim = dim
        c = {}
        for (a, b, k), v in constants.items():
            v = Fraction(v)
            if v:
                c[(a, b, k)] = v
        self.constants = c
        self.names = tuple(names) if names else tuple(
            f"e{i+1}" for i in range(dim))
        if len(self.names) != dim:
            raise ValueError("wrong number of basis names")

    @staticmethod
    def from_table(dim: int, table, names=None) -> "FiniteAlgebra":
        """table[a][b] is the coefficient tuple of product(e_a, e_b)."""
        constants = {}
        for a in range(dim):
            for b in range(dim):
                for k, v in enumerate(table[a][b]):
                    constants[(a, b, k)] = v
        return FiniteAlgebra(dim, constants, names)

    def basis_product(self, a: int, b: int) -> tuple:
        return tuple(self.constants.get((a, b, k), Fraction(0))
                     for k in range(self.dim))

    def product(self, u, v) -> tuple:
        out = [Fraction(0)] * self.dim
        for a, ua in enumerate(u):
            if not ua:
                continue
            for b, vb in enumerate(v):
                if not vb:
                    continue
                for k in range(self.dim):
                    c = self.constants.get((a, b, k))
                    if c:
                        out[k] += ua * vb * c
        return tuple(out)

    def commutator(self, u, v) -> tuple:
        uv = self.product(u, v)
        vu = self.product(v, u)
        return tuple(x - y for x, y in zip(uv, vu))

    def basis_vector(self, a: int) -> tuple:
        return tuple(Fraction(1 if i == a else 0) for i in range(self.dim))

    def associator(self, u, v, w) -> tuple:
        left = self.product(u, self.product(v, w))
        right = self.product(self.product(u, v), w)
        return tuple(x - y for x, y in zip(left, right))

    def is_abelian(self) -> bool:
        return not self.constants

    def __repr__(self):
        entries = []
        for a in range(self.dim):
            for b in range(self.dim):
                p = self.basis_product(a, b)
                if any(p):
                    s = " + ".join(f"{v}*{self.names[k]}"
                                   for k, v in enumerate(p) if v)
                    entries.append(f"{self.names[a]}*{self.names[b]} = {s}")
        return f"FiniteAlgebra(dim={self.dim}, {'; '.join(entries) or '0'})"


@dataclass(frozen=True)
class SkewForm:
    """A bilinear form as a matrix: value(e_a, e_b) = matrix[a][b]."""

    matrix: QMatrix

    def value(self, u, v) -> Fraction:
        rows = self.matrix.rows
        total = Fraction(0)
        for a, ua in enumerate(u):
            if not ua:
                continue
            for b, vb in enumerate(v):
                if vb:
                    total += ua * vb * rows[a][b]
        return total


@dataclass(frozen=True)
class RepresentationData:
    """A pair of linear actions on a module: rho for the bracket side,
    mu for the right-multiplication side."""

    rho: tuple  # one QMatrix per basis element
    mu: tuple

    @property
    def module_dim(self) -> int:
        return self.rho[0].nrows


def _fmt_vec(vec, names) -> str:
    parts = [f"{v}*{names[k]}" for k, v in enumerate(vec) if v]
    return " + ".join(parts) if parts else "0"


def check_left_symmetric(alg: FiniteAlgebra, artifact: str = "algebra"
                         ) -> CheckReport:
    """Associator symmetry in the first two slots, plus the Jacobi identity
    of the commutator (which left-symmetry implies; checked independently)."""
    rec = Recorder(artifact)
    d = alg.dim

    def assoc_sym():
        for a, b, c in itertools.product(range(d), repeat=3):
            ea, eb, ec = (alg.basis_vector(i) for i in (a, b, c))
            left = alg.associator(ea, eb, ec)
            right = alg.associator(eb, ea, ec)
            resid = tuple(x - y for x, y in zip(left, right))
            if any(resid):
                return False, (f"({alg.names[a]},{alg.names[b]},"
                               f"{alg.names[c]}): residual = "
                               f"{_fmt_vec(resid, alg.names)}")
        return True, None

    def jacobi():
        for a, b, c in itertools.combinations(range(d), 3):
            ea, eb, ec = (alg.basis_vector(i) for i in (a, b, c))
            s = alg.commutator(alg.commutator(ea, eb), ec)
            s = tuple(x + y for x, y in zip(
                s, alg.commutator(alg.commutator(eb, ec), ea)))
            s = tuple(x + y for x, y in zip(
                s, alg.commutator(alg.commutator(ec, ea), eb)))
            if any(s):
                return False, (f"({alg.names[a]},{alg.names[b]},"
                               f"{alg.names[c]}): residual = "
                               f"{_fmt_vec(s, alg.names)}")
        return True, None

    rec.run("lsa.left-symmetric", assoc_sym)
    rec.run("lsa.subadjacent-jacobi", jacobi)
    return rec.report


def subadjacent_lie(alg: FiniteAlgebra) -> FiniteAlgebra:
    """The commutator algebra of a left-symmetric product."""
    constants = {}
    for a in range(alg.dim):
        for b in range(alg.dim):
            vec = alg.commutator(alg.basis_vector(a), alg.basis_vector(b))
            for k, v in enumerate(vec):
                if v:
                    constants[(a, b, k)] = v
    return FiniteAlgebra(alg.dim, constants, alg.names)


def check_invariant_form(alg: FiniteAlgebra, form: SkewForm,
                         artifact: str = "algebra") -> CheckReport:
    """Skewness, nondegeneracy, and (x*y, z) + (y, [x,z]) = 0."""
    rec = Recorder(artifact)
    d = alg.dim
    m = form.matrix

    rec.run("lsa.form-skew", lambda: (
        all(m.rows[a][b] == -m.rows[b][a]
            for a in range(d) for b in range(d)),
        None))

    def nondeg():
        try:
            qinvert(m)
            return True, None
        except SingularMatrixError:
            return False, "pairing matrix is singular"

    rec.run("lsa.form-nondegenerate", nondeg)

    def invariance():
        for a, b, c in itertools.product(range(d), repeat=3):
            ea, eb, ec = (alg.basis_vector(i) for i in (a, b, c))
            r = form.value(alg.product(ea, eb), ec) + \
                form.value(eb, alg.commutator(ea, ec))
            if r:
                return False, (f"({alg.names[a]},{alg.names[b]},"
                               f"{alg.names[c]}): residual = {r}")
        return True, None

    rec.run("lsa.form-invariance", invariance)
    return rec.report


def _check_form_cocycle(lie: FiniteAlgebra, form: SkewForm):
    for a, b, c in itertools.combinations(range(lie.dim), 3):
        ea, eb, ec = (lie.basis_vector(i) for i in (a, b, c))
        r = form.value(lie.product(ea, eb), ec) \
            - form.value(lie.product(ea, ec), eb) \
            + form.value(lie.product(eb, ec), ea)
        if r:
            return False, (f"({lie.names[a]},{lie.names[b]},{lie.names[c]}):"
                           f" residual = {r}")
    return True, None


def lsa_from_symplectic_lie(lie: FiniteAlgebra, form: SkewForm
                            ) -> FiniteAlgebra:
    """The product defined by form(x*y, z) = -form(y, [x,z]) on a Lie
    algebra with a nondegenerate closed skew form.

    Raises ValueError when the preconditions fail (not skew, not Jacobi,
    degenerate or non-closed form).
    """
    d = lie.dim
    for a in range(d):
        for b in range(d):
            pab = lie.basis_product(a, b)
            pba = lie.basis_product(b, a)
            if any(x + y for x, y in zip(pab, pba)):
                raise ValueError("bracket is not skew")
    rep = check_left_symmetric(lie, "lie")
    if rep.find("lsa.subadjacent-jacobi").status != "pass":
        raise ValueError("bracket fails the Jacobi identity")
    m = form.matrix
    for a in range(d):
        for b in range(d):
            if m.rows[a][b] != -m.rows[b][a]:
                raise ValueError("form is not skew")
    ok, witness = _check_form_cocycle(lie, form)
    if not ok:
        raise ValueError(f"form is not closed: {witness}")
    try:
        minv = qinvert(m)
    except SingularMatrixError:
        raise ValueError("form is degenerate") from None
    constants = {}
    for a in range(d):
        ea = lie.basis_vector(a)
        for b in range(d):
            eb = lie.basis_vector(b)
            # rhs_c = -form(e_b, [e_a, e_c]); solve m^T x = rhs
            rhs = tuple(-form.value(eb, lie.product(ea, lie.basis_vector(c)))
                        for c in range(d))
            x = minv.transpose().mulvec(rhs)
            for k, v in enumerate(x):
                if v:
                    constants[(a, b, k)] = v
    return FiniteAlgebra(d, constants, lie.names)


def check_representation(alg: FiniteAlgebra, rep: RepresentationData,
                         artifact: str = "representation") -> CheckReport:
    rec = Recorder(artifact)
    d = alg.dim

    def lie_condition():
        for a in range(d):
            for b in range(d):
                lhs = rep.rho[a].matmul(rep.rho[b]).rows
                rhs = rep.rho[b].matmul(rep.rho[a]).rows
                comm = alg.commutator(alg.basis_vector(a),
                                      alg.basis_vector(b))
                m = rep.module_dim
                for i in range(m):
                    for j in range(m):
                        want = sum(comm[k] * rep.rho[k].rows[i][j]
                                   for k in range(d))
                        if lhs[i][j] - rhs[i][j] != want:
                            return False, (f"({alg.names[a]},{alg.names[b]})"
                                           f" entry ({i},{j})")
        return True, None

    def product_condition():
        m = rep.module_dim
        for a in range(d):
            for b in range(d):
                lhs = rep.rho[a].matmul(rep.mu[b]).rows
                l2 = rep.mu[b].matmul(rep.rho[a]).rows
                prod = alg.basis_product(a, b)
                r2 = rep.mu[b].matmul(rep.mu[a]).rows
                for i in range(m):
                    for j in range(m):
                        want = sum(prod[k] * rep.mu[k].rows[i][j]
                                   for k in range(d)) - r2[i][j]
                        if lhs[i][j] - l2[i][j] != want:
                            return False, (f"({alg.names[a]},{alg.names[b]})"
                                           f" entry ({i},{j})")
        return True, None

    rec.run("lsa.rep-lie", lie_condition)
    rec.run("lsa.rep-product", product_condition)
    return rec.report


# ---------------------------------------------------------------------------
# scalar cochains at a point


class Cochain:
    """A scalar n-cochain: n arguments, antisymmetric in the first n-1.

    Components are stored on canonical keys (strictly increasing index
    tuple for the first n-1 slots, free last index)."""

    def __init__(self, dim: int, degree: int, components=None):
        if degree < 1:
            raise ValueError("degree must be >= 1")
        self.dim = dim
        self.degree = degree
        comp = {}
        for key, v in (components or {}).items():
            first, last = key
            first = tuple(first)
            if len(first) != degree - 1:
                raise ValueError(f"bad key {key} for degree {degree}")
            if list(first) != sorted(set(first)):
                raise ValueError(f"non-canonical key {key}")
            v = Fraction(v)
            if v:
                comp[(first, last)] = v
        self.components = comp

    def value(self, args) -> Fraction:
        if len(args) != self.degree:
            raise ValueError("wrong argument count")
        first, last = tuple(args[:-1]), args[-1]
        if len(set(first)) < len(first):
            return Fraction(0)
        order = sorted(range(len(first)), key=lambda i: first[i])
        sign = _perm_sign(order)
        key = (tuple(first[i] for i in order), last)
        return sign * self.components.get(key, Fraction(0))

    @staticmethod
    def keys(dim: int, degree: int):
        for first in itertools.combinations(range(dim), degree - 1):
            for last in range(dim):
                yield (first, last)

    def to_vector(self) -> tuple:
        return tuple(self.components.get(k, Fraction(0))
                     for k in Cochain.keys(self.dim, self.degree))

    @staticmethod
    def from_vector(dim: int, degree: int, vec) -> "Cochain":
        comp = {}
        for k, v in zip(Cochain.keys(dim, degree), vec):
            comp[k] = v
        return Cochain(dim, degree, comp)


def _perm_sign(order) -> int:
    sign = 1
    seen = [False] * len(order)
    for i in range(len(order)):
        if seen[i]:
            continue
        j = i
        length = 0
        while not seen[j]:
            seen[j] = True
            j = order[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def cochain_space_dim(dim: int, degree: int) -> int:
    from math import comb
    return comb(dim, degree - 1) * dim


def coboundary(alg: FiniteAlgebra, phi: Cochain) -> Cochain:
    """Point-case coboundary of the scalar complex over a left-symmetric
    algebra (the anchor term is absent at a point)."""
    if phi.dim != alg.dim:
        raise ValueError("dimension mismatch")
    n = phi.degree
    d = alg.dim
    comp = {}
    for first, last in Cochain.keys(d, n + 1):
        args = list(first) + [last]
        total = Fraction(0)
        # product term: - sum_i (-1)^(i+1) phi(..omit i.., args[i] * last)
        for i in range(n):
            sign = -1 if i % 2 == 0 else 1  # -(-1)^(i+1) with i zero-based
            rest = [args[j] for j in range(n) if j != i]
            prod = alg.basis_product(args[i], last)
            for k, cv in enumerate(prod):
                if cv:
                    total += sign * cv * phi.value(tuple(rest[:n - 1] + [k]))
        # bracket term: + sum_{i<j} (-1)^(i+j) phi([xi,xj], .., last)
        for i in range(n):
            for j in range(i + 1, n):
                sign = 1 if (i + j) % 2 == 0 else -1  # (-1)^(i+1 + j+1)
                comm = alg.commutator(alg.basis_vector(args[i]),
                                      alg.basis_vector(args[j]))
                rest = [args[t] for t in range(n) if t != i and t != j]
                for k, cv in enumerate(comm):
                    if cv:
                        total += sign * cv * phi.value(
                            tuple([k] + rest + [last]))
        if total:
            comp[(first, last)] = total
    return Cochain(d, n + 1, comp)


def membership_matrix(alg: FiniteAlgebra, degree: int) -> QMatrix:
    """Constraint rows whose kernel is the restricted subspace:
    degree 1: vanishing on commutators; degree 2: symmetry; degree 3:
    vanishing cyclic sum; degree >= 4: no constraint."""
    d = alg.dim
    cols = list(Cochain.keys(d, degree))
    colpos = {k: i for i, k in enumerate(cols)}
    rows = []

    def row_from_values(entries):
        row = [Fraction(0)] * len(cols)
        for key, sign in entries:
            first, last = key
            order = sorted(range(len(first)), key=lambda i: first[i])
            if len(set(first)) < len(first):
                continue
            canon = (tuple(first[i] for i in order), last)
            row[colpos[canon]] += sign * _perm_sign(order)
        return row

    if degree == 1:
        for a in range(d):
            for b in range(a + 1, d):
                comm = alg.commutator(alg.basis_vector(a),
                                      alg.basis_vector(b))
                row = [Fraction(0)] * len(cols)
                for k, v in enumerate(comm):
                    if v:
                        row[colpos[((), k)]] += v
                if any(row):
                    rows.append(row)
    elif degree == 2:
        for a in range(d):
            for b in range(a + 1, d):
                rows.append(row_from_values(
                    [(((a,), b), 1), (((b,), a), -1)]))
    elif degree == 3:
        for a, b, c in itertools.product(range(d), repeat=3):
            row = row_from_values([
                (((a, b), c), 1), (((b, c), a), 1), (((c, a), b), 1)])
            if any(row):
                rows.append(row)
    if not rows:
        return QMatrix.zeros(1, len(cols))
    return QMatrix(rows)


def restricted_basis(alg: FiniteAlgebra, degree: int):
    """Basis vectors (full-space coordinates) of the restricted subspace."""
    return kernel_basis(membership_matrix(alg, degree))


def coboundary_matrix(alg: FiniteAlgebra, degree: int) -> QMatrix:
    """Matrix of the coboundary on the full cochain space."""
    d = alg.dim
    cols = list(Cochain.keys(d, degree))
    out_cols = []
    for key in cols:
        phi = Cochain(d, degree, {key: Fraction(1)})
        out_cols.append(coboundary(alg, phi).to_vector())
    if not out_cols:
        return QMatrix.zeros(1, 1)
    return QMatrix(list(zip(*out_cols)))


def restricted_cohomology_dims(alg: FiniteAlgebra, degree: int,
                               elimination: str = "bareiss"):
    """(dim ker, dim im, dim quotient) of the restricted complex at one
    degree: kernel of the coboundary leaving the restricted subspace,
    image of the coboundary entering it from the restricted subspace one
    degree lower.

    `elimination` selects the rank routine ("bareiss" or "gauss"), so two
    independently coded eliminations can be compared.
    """
    if degree < 1:
        raise ValueError("degree must be >= 1")
    rk = rank if elimination == "bareiss" else rank_second_opinion

    def restricted_rank_and_nullity(n):
        basis = restricted_basis(alg, n)
        if not basis:
            return 0, 0
        delta = coboundary_matrix(alg, n)
        image_cols = [delta.mulvec(v) for v in basis]
        m = QMatrix(list(zip(*image_cols)))
        r = rk(m)
        return r, len(basis) - r

    rank_n, ker_n = restricted_rank_and_nullity(degree)
    if degree == 1:
        im = 0
    else:
        im = restricted_rank_and_nullity(degree - 1)[0]
    return ker_n, im, ker_n - im
