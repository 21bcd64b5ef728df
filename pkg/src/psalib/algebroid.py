"""Anchored bundles over one chart: brackets, products, forms.

A ChartAlgebroid stores a frame, an anchor (rows of chart vector-field
components, one per frame element), and a structure table: either a bracket
(kind "lie") or a left-symmetric product (kind "lsa").  Sections are
coefficient tuples over the frame; section-level operations extend the
frame table by the scalar-function rules that the axioms force, and the
check functions verify those axioms with a fresh formal function symbol so
the extension itself is exercised, not assumed.
"""

from __future__ import annotations

import itertools

from .exprcore import ChartContext, DiffExpr, differentiate
from .report import CheckReport, Recorder

__all__ = [
    "ChartAlgebroid",
    "FormField",
    "check_lie_algebroid",
    "check_left_symmetric_algebroid",
    "de_rham_d",
    "check_2cocycle",
    "lie_derivative",
    "section_str",
]


def section_str(coeffs, names) -> str:
    parts = []
    for c, n in zip(coeffs, names):
        if not c.is_zero():
            parts.append(f"({c})*{n}")
    return " + ".join(parts) if parts else "0"


class ChartAlgebroid:
    """kind "lie": table[a][b] = coefficients of [e_a, e_b];
    kind "lsa": table[a][b] = coefficients of e_a * e_b."""

    def __init__(self, ctx: ChartContext, names, anchor, table,
                 kind: str = "lie"):
        if kind not in ("lie", "lsa"):
            raise ValueError("kind must be 'lie' or 'lsa'")
        self.ctx = ctx
        self.names = tuple(names)
        self.rank = len(self.names)
        n = len(ctx.coords)
        self.anchor = tuple(
            tuple(self._expr(x) for x in row) for row in anchor)
        if len(self.anchor) != self.rank or any(
                len(r) != n for r in self.anchor):
            raise ValueError("anchor shape must be rank x #coords")
        self.table = tuple(
            tuple(tuple(self._expr(x) for x in cell) for cell in row)
            for row in table)
        if len(self.table) != self.rank or any(
                len(row) != self.rank or any(len(c) != self.rank
                                             for c in row)
                for row in self.table):
            raise ValueError("table shape must be rank x rank x rank")
        self.kind = kind

    def _expr(self, x) -> DiffExpr:
        return x if isinstance(x, DiffExpr) else self.ctx.number(x)

    # -- sections ---------------------------------------------------------

    def zero_section(self):
        return tuple(self.ctx.zero() for _ in range(self.rank))

    def frame_section(self, a: int):
        return tuple(self.ctx.one() if i == a else self.ctx.zero()
                     for i in range(self.rank))

    def anchor_of(self, u):
        """Chart vector-field components of the anchor of a section."""
        n = len(self.ctx.coords)
        out = [self.ctx.zero()] * n
        for a, ua in enumerate(u):
            if ua.is_zero():
                continue
            for i in range(n):
                out[i] = out[i] + ua * self.anchor[a][i]
        return tuple(out)

    def anchor_apply(self, u, f: DiffExpr) -> DiffExpr:
        """Derivation action of the anchor of u on a scalar."""
        out = self.ctx.zero()
        if not self.ctx.coords:
            return out
        partials = [differentiate(f, c) for c in self.ctx.coords]
        for a, ua in enumerate(u):
            if ua.is_zero():
                continue
            for i, df in enumerate(partials):
                if not df.is_zero() and not self.anchor[a][i].is_zero():
                    out = out + ua * self.anchor[a][i] * df
        return out

    def frame_table(self, a: int, b: int):
        return self.table[a][b]

    def bracket(self, u, v):
        """Section bracket: frame table + Leibniz terms on both slots."""
        if self.kind != "lie":
            raise ValueError("not a bracket structure")
        out = list(self.zero_section())
        for a, ua in enumerate(u):
            if ua.is_zero():
                continue
            for b, vb in enumerate(v):
                if vb.is_zero():
                    continue
                cell = self.table[a][b]
                for k in range(self.rank):
                    if not cell[k].is_zero():
                        out[k] = out[k] + ua * vb * cell[k]
        for b, vb in enumerate(v):
            if not vb.is_constant():
                out[b] = out[b] + self.anchor_apply(u, vb)
        for a, ua in enumerate(u):
            if not ua.is_constant():
                out[a] = out[a] - self.anchor_apply(v, ua)
        return tuple(out)

    def product(self, u, v):
        """Section product: frame table + derivation on the right slot only
        (the left slot is scalar-linear)."""
        if self.kind != "lsa":
            raise ValueError("not a product structure")
        out = list(self.zero_section())
        for a, ua in enumerate(u):
            if ua.is_zero():
                continue
            for b, vb in enumerate(v):
                if vb.is_zero():
                    continue
                cell = self.table[a][b]
                for k in range(self.rank):
                    if not cell[k].is_zero():
                        out[k] = out[k] + ua * vb * cell[k]
        for b, vb in enumerate(v):
            if not vb.is_constant():
                out[b] = out[b] + self.anchor_apply(u, vb)
        return tuple(out)

    def compose(self, u, v):
        return self.bracket(u, v) if self.kind == "lie" else \
            self.product(u, v)

    def commutator_algebroid(self) -> "ChartAlgebroid":
        """The bracket structure x*y - y*x of a product structure."""
        if self.kind != "lsa":
            raise ValueError("already a bracket structure")
        table = [[tuple(self.table[a][b][k] - self.table[b][a][k]
                        for k in range(self.rank))
                  for b in range(self.rank)] for a in range(self.rank)]
        return ChartAlgebroid(self.ctx, self.names, self.anchor, table,
                              kind="lie")


def _vector_field_bracket(ctx: ChartContext, X, Y):
    """[X, Y]^i = X^j d_j Y^i - Y^j d_j X^i on chart components."""
    n = len(ctx.coords)
    out = []
    for i in range(n):
        acc = ctx.zero()
        for j, cj in enumerate(ctx.coords):
            if not X[j].is_zero():
                acc = acc + X[j] * differentiate(Y[i], cj)
            if not Y[j].is_zero():
                acc = acc - Y[j] * differentiate(X[i], cj)
        out.append(acc)
    return tuple(out)


def _with_fresh_func(ctx: ChartContext):
    name = ctx.fresh_func_name("f")
    ext = ctx.extended((name,))
    return ext, ext.function(name)


def _lift(alg: ChartAlgebroid, ext: ChartContext) -> ChartAlgebroid:
    """The same algebroid with an extended function-symbol context."""
    return ChartAlgebroid(ext, alg.names, alg.anchor, alg.table, alg.kind)


def check_lie_algebroid(alg: ChartAlgebroid, artifact: str = "algebroid"
                        ) -> CheckReport:
    """Skewness and Jacobi on frame triples, the scalar Leibniz rule and
    Jacobi with a formal function slot, and the anchor acting as a bracket
    morphism to chart vector fields."""
    rec = Recorder(artifact)
    if alg.kind != "lie":
        raise ValueError("check_lie_algebroid needs a bracket structure")
    r = alg.rank
    ext, f = _with_fresh_func(alg.ctx)
    lifted = _lift(alg, ext)

    def skew():
        for a in range(r):
            for b in range(a, r):
                resid = tuple(alg.table[a][b][k] + alg.table[b][a][k]
                              for k in range(r))
                if any(not x.is_zero() for x in resid):
                    return False, (f"[{alg.names[a]},{alg.names[b]}] + "
                                   f"[{alg.names[b]},{alg.names[a]}] = "
                                   f"{section_str(resid, alg.names)}")
        return True, None

    def jacobi():
        frames = [lifted.frame_section(a) for a in range(r)]
        for a, b, c in itertools.combinations(range(r), 3):
            resid = _jacobi_residual(lifted, frames[a], frames[b], frames[c])
            if any(not x.is_zero() for x in resid):
                return False, (f"({alg.names[a]},{alg.names[b]},"
                               f"{alg.names[c]}): residual = "
                               f"{section_str(resid, alg.names)}")
        # one formal scalar slot; covers the anchor-derivation interplay
        for a, b, c in itertools.product(range(r), repeat=3):
            scaled = tuple(f * x for x in frames[c])
            resid = _jacobi_residual(lifted, frames[a], frames[b], scaled)
            if any(not x.is_zero() for x in resid):
                return False, (f"({alg.names[a]},{alg.names[b]},"
                               f"f*{alg.names[c]}): residual = "
                               f"{section_str(resid, alg.names)}")
        return True, None

    def leibniz():
        for a in range(r):
            for b in range(r):
                ea = lifted.frame_section(a)
                eb = lifted.frame_section(b)
                lhs = lifted.bracket(ea, tuple(f * x for x in eb))
                want = list(f * x for x in lifted.table[a][b])
                want[b] = want[b] + lifted.anchor_apply(ea, f)
                resid = tuple(x - y for x, y in zip(lhs, want))
                if any(not x.is_zero() for x in resid):
                    return False, (f"[{alg.names[a]}, f*{alg.names[b]}]: "
                                   f"residual = "
                                   f"{section_str(resid, alg.names)}")
        return True, None

    def anchor_morphism():
        for a in range(r):
            for b in range(r):
                lhs = alg.anchor_of(alg.table[a][b])
                rhs = _vector_field_bracket(alg.ctx, alg.anchor[a],
                                            alg.anchor[b])
                resid = tuple(x - y for x, y in zip(lhs, rhs))
                if any(not x.is_zero() for x in resid):
                    return False, (f"rho[{alg.names[a]},{alg.names[b]}] - "
                                   f"[rho {alg.names[a]}, rho {alg.names[b]}]"
                                   f" = {section_str(resid, alg.ctx.coords)}")
        return True, None

    rec.run("algebroid.bracket-skew", skew)
    rec.run("algebroid.jacobi", jacobi)
    rec.run("algebroid.leibniz", leibniz)
    rec.run("algebroid.anchor-morphism", anchor_morphism)
    return rec.report


def _jacobi_residual(alg: ChartAlgebroid, x, y, z):
    s = alg.bracket(alg.bracket(x, y), z)
    s = tuple(p + q for p, q in zip(s, alg.bracket(alg.bracket(y, z), x)))
    return tuple(p + q for p, q in zip(
        s, alg.bracket(alg.bracket(z, x), y)))


def check_left_symmetric_algebroid(alg: ChartAlgebroid,
                                   artifact: str = "algebroid"
                                   ) -> CheckReport:
    """The two scalar rules of a left-symmetric product over a chart and
    associator symmetry on frame triples with a formal function slot."""
    rec = Recorder(artifact)
    if alg.kind != "lsa":
        raise ValueError("needs a product structure")
    r = alg.rank
    ext, f = _with_fresh_func(alg.ctx)
    lifted = _lift(alg, ext)
    frames = [lifted.frame_section(a) for a in range(r)]

    def scalar_left():
        for a in range(r):
            for b in range(r):
                lhs = lifted.product(frames[a], tuple(f * x
                                                      for x in frames[b]))
                want = list(f * x for x in lifted.table[a][b])
                want[b] = want[b] + lifted.anchor_apply(frames[a], f)
                resid = tuple(x - y for x, y in zip(lhs, want))
                if any(not x.is_zero() for x in resid):
                    return False, (f"{alg.names[a]} * f*{alg.names[b]}: "
                                   f"residual = "
                                   f"{section_str(resid, alg.names)}")
        return True, None

    def scalar_right():
        for a in range(r):
            for b in range(r):
                lhs = lifted.product(tuple(f * x for x in frames[a]),
                                     frames[b])
                want = tuple(f * x for x in lifted.table[a][b])
                resid = tuple(x - y for x, y in zip(lhs, want))
                if any(not x.is_zero() for x in resid):
                    return False, (f"f*{alg.names[a]} * {alg.names[b]}: "
                                   f"residual = "
                                   f"{section_str(resid, alg.names)}")
        return True, None

    def left_symmetric():
        def assoc(x, y, z):
            return tuple(
                p - q for p, q in zip(
                    lifted.product(x, lifted.product(y, z)),
                    lifted.product(lifted.product(x, y), z)))

        for a, b, c in itertools.product(range(r), repeat=3):
            variants = [
                (frames[a], frames[b], frames[c], ""),
                (frames[a], frames[b], tuple(f * x for x in frames[c]),
                 " (formal scalar on the third slot)"),
            ]
            for x, y, z, tag in variants:
                l = assoc(x, y, z)
                rgt = assoc(y, x, z)
                resid = tuple(p - q for p, q in zip(l, rgt))
                if any(not t.is_zero() for t in resid):
                    return False, (f"({alg.names[a]},{alg.names[b]},"
                                   f"{alg.names[c]}){tag}: residual = "
                                   f"{section_str(resid, alg.names)}")
        return True, None

    rec.run("algebroid.lsa.scalar-left", scalar_left)
    rec.run("algebroid.lsa.scalar-right", scalar_right)
    rec.run("algebroid.lsa.left-symmetric", left_symmetric)
    return rec.report


class FormField:
    """An alternating k-slot field over the frame, components on strictly
    increasing index tuples."""

    def __init__(self, ctx: ChartContext, rank: int, degree: int,
                 components=None):
        self.ctx = ctx
        self.rank = rank
        self.degree = degree
        comp = {}
        for key, v in (components or {}).items():
            key = tuple(key)
            if len(key) != degree or list(key) != sorted(set(key)):
                raise ValueError(f"non-canonical form key {key}")
            v = v if isinstance(v, DiffExpr) else ctx.number(v)
            if not v.is_zero():
                comp[key] = v
        self.components = comp

    def value_frame(self, idx) -> DiffExpr:
        if len(idx) != self.degree:
            raise ValueError("wrong slot count")
        if len(set(idx)) < len(idx):
            return self.ctx.zero()
        order = sorted(range(len(idx)), key=lambda i: idx[i])
        sign = 1
        # permutation sign by explicit inversion count (degrees are tiny)
        for i in range(len(order)):
            for j in range(i + 1, len(order)):
                if order[i] > order[j]:
                    sign = -sign
        key = tuple(idx[i] for i in order)
        got = self.components.get(key)
        if got is None:
            return self.ctx.zero()
        return got if sign == 1 else -got

    def value(self, sections) -> DiffExpr:
        """Multilinear evaluation on coefficient tuples."""
        if len(sections) != self.degree:
            raise ValueError("wrong slot count")
        total = self.ctx.zero()
        for idx in itertools.product(range(self.rank), repeat=self.degree):
            coeff = self.ctx.one()
            dead = False
            for s, i in zip(sections, idx):
                if s[i].is_zero():
                    dead = True
                    break
                coeff = coeff * s[i]
            if dead:
                continue
            base = self.value_frame(idx)
            if not base.is_zero():
                total = total + coeff * base
        return total


def de_rham_d(alg: ChartAlgebroid, form: FormField) -> FormField:
    """Chart-level differential: anchor terms on omitted slots plus bracket
    contractions, on the bracket structure of the algebroid."""
    if alg.kind != "lie":
        alg = alg.commutator_algebroid()
    k = form.degree
    comp = {}
    for key in itertools.combinations(range(alg.rank), k + 1):
        total = alg.ctx.zero()
        for i in range(k + 1):
            rest = key[:i] + key[i + 1:]
            base = form.value_frame(rest)
            if not base.is_zero():
                term = alg.anchor_apply(alg.frame_section(key[i]), base)
                total = total + (term if i % 2 == 0 else -term)
        for i in range(k + 1):
            for j in range(i + 1, k + 1):
                cell = alg.table[key[i]][key[j]]
                rest = tuple(key[t] for t in range(k + 1)
                             if t != i and t != j)
                sign = 1 if (i + j) % 2 == 0 else -1  # (-1)^(i+1 + j+1)
                for m in range(alg.rank):
                    if cell[m].is_zero():
                        continue
                    base = form.value_frame((m,) + rest)
                    if not base.is_zero():
                        total = total + sign * cell[m] * base
        if not total.is_zero():
            comp[key] = total
    return FormField(alg.ctx, alg.rank, k + 1, comp)


def check_2cocycle(alg: ChartAlgebroid, form: FormField,
                   artifact: str = "form") -> CheckReport:
    rec = Recorder(artifact)
    r = alg.rank

    rec.run("form.skew", lambda: (
        all(form.value_frame((a, b)) + form.value_frame((b, a)) ==
            alg.ctx.zero() for a in range(r) for b in range(r)), None))

    def closed():
        d = de_rham_d(alg, form)
        for key, v in d.components.items():
            if not v.is_zero():
                names = ",".join(alg.names[i] for i in key)
                return False, f"({names}): residual = {v}"
        return True, None

    rec.run("form.closed", closed)
    return rec.report


def lie_derivative(alg: ChartAlgebroid, x, xi):
    """Covector derivative along a section: the pairing with any y gives
    anchor(x) <xi, y> - <xi, [x, y]>."""
    if alg.kind != "lie":
        raise ValueError("lie_derivative needs a bracket structure")
    out = []
    for b in range(alg.rank):
        term = alg.anchor_apply(x, xi[b]) if not xi[b].is_constant() else \
            alg.ctx.zero()
        br = alg.bracket(x, alg.frame_section(b))
        acc = term
        for k in range(alg.rank):
            if not br[k].is_zero() and not xi[k].is_zero():
                acc = acc - xi[k] * br[k]
        out.append(acc)
    return tuple(out)
