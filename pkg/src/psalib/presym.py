"""Skew-paired product structures on a chart frame.

The carrier stores a frame product table (in general neither symmetric
nor skew), an anchor, and a nondegenerate skew pairing.  Products of
function-coefficient sections are generated from the frame table by the
two scalar extension identities together with the pairing-gradient
operator D; check_presymplectic verifies the defining identities, the
extension identities, the cyclic trace identity, and the D-compatibility
rule, each with a formal function slot where the identity is not
C-infinity-linear.

Both correspondence directions live here as well: commutator plus
pairing yields a bracket structure with a closed 2-form, and a bracket
structure with a closed nondegenerate 2-form determines the product
table uniquely through the pairing's inverse.
"""

from fractions import Fraction

from .algebroid import ChartAlgebroid, FormField, de_rham_d, section_str
from .exactlinalg import (ExprMatrix, SingularMatrixError, expr_rank,
                          expr_solve, invert)
from .exprcore import ChartContext, DiffExpr
from .report import CheckReport, Recorder

__all__ = [
    "PreSymStructure", "Subbundle", "operator_D", "tensor_T",
    "check_presymplectic", "symplectic_from_presym", "presym_from_symplectic",
    "pseudo_semidirect", "check_dirac",
]


class PreSymStructure:
    """Frame product table + anchor + skew nondegenerate pairing."""

    def __init__(self, ctx: ChartContext, names, anchor, table, pairing):
        # reuse the algebroid carrier for shape validation and anchor work
        self._prod = ChartAlgebroid(ctx, names, anchor, table, kind="lsa")
        self.ctx = ctx
        self.names = self._prod.names
        self.rank = self._prod.rank
        self.anchor = self._prod.anchor
        self.table = self._prod.table
        if not isinstance(pairing, ExprMatrix):
            pairing = ExprMatrix(ctx, pairing)
        if pairing.nrows != self.rank or pairing.ncols != self.rank:
            raise ValueError("pairing must be rank x rank")
        self.pairing = pairing
        self._half = ctx.number(Fraction(1, 2))
        self._inv_pairing = None
        self._comm = None
        self._d_cache: dict[DiffExpr, tuple] = {}

    def _expr(self, x) -> DiffExpr:
        return x if isinstance(x, DiffExpr) else self.ctx.number(x)

    # -- derived pieces -----------------------------------------------------

    @property
    def inverse_pairing(self) -> ExprMatrix:
        if self._inv_pairing is None:
            self._inv_pairing = invert(self.pairing)
        return self._inv_pairing

    def commutator_algebroid(self) -> ChartAlgebroid:
        """The bracket structure u*v - v*u with the same anchor."""
        if self._comm is None:
            self._comm = self._prod.commutator_algebroid()
        return self._comm

    def zero_section(self):
        return self._prod.zero_section()

    def frame_section(self, a: int):
        return self._prod.frame_section(a)

    def _section(self, x):
        if isinstance(x, int):
            return self.frame_section(x)
        return tuple(self._expr(c) for c in x)

    def anchor_apply(self, u, f: DiffExpr) -> DiffExpr:
        return self._prod.anchor_apply(self._section(u), f)

    def pairing_value(self, u, v) -> DiffExpr:
        u, v = self._section(u), self._section(v)
        acc = self.ctx.zero()
        rows = self.pairing.rows
        for a in range(self.rank):
            if u[a].is_zero():
                continue
            for b in range(self.rank):
                if not v[b].is_zero() and not rows[a][b].is_zero():
                    acc = acc + u[a] * v[b] * rows[a][b]
        return acc

    def D(self, f: DiffExpr):
        """The section dual to rho(.)(f) under the pairing."""
        cached = self._d_cache.get(f)
        if cached is not None:
            return cached
        rhs = [self.anchor_apply(self.frame_section(b), f)
               for b in range(self.rank)]
        col = self.inverse_pairing.mulvec(rhs)
        out = tuple(-x for x in col)
        self._d_cache[f] = out
        return out

    # -- products on sections ------------------------------------------------

    def star(self, u, v):
        u, v = self._section(u), self._section(v)
        out = [self.ctx.zero()] * self.rank
        for a in range(self.rank):
            ua = u[a]
            if ua.is_zero():
                continue
            eav = self._frame_star(a, v)
            for k in range(self.rank):
                if not eav[k].is_zero():
                    out[k] = out[k] + ua * eav[k]
            if not ua.is_constant():
                # (f e_a) * v picks up -1/2 (e_a, v) D f
                pav = self.ctx.zero()
                for b in range(self.rank):
                    if not v[b].is_zero() and \
                            not self.pairing.rows[a][b].is_zero():
                        pav = pav + v[b] * self.pairing.rows[a][b]
                if not pav.is_zero():
                    du = self.D(ua)
                    for k in range(self.rank):
                        if not du[k].is_zero():
                            out[k] = out[k] - self._half * pav * du[k]
        return tuple(out)

    def _frame_star(self, a: int, v):
        """e_a * v with the transport and D corrections."""
        out = [self.ctx.zero()] * self.rank
        frame_a = self.frame_section(a)
        for b in range(self.rank):
            vb = v[b]
            if vb.is_zero():
                continue
            cell = self.table[a][b]
            for k in range(self.rank):
                if not cell[k].is_zero():
                    out[k] = out[k] + vb * cell[k]
            der = self._prod.anchor_apply(frame_a, vb)
            if not der.is_zero():
                out[b] = out[b] + der
            if not vb.is_constant():
                w_ab = self.pairing.rows[a][b]
                if not w_ab.is_zero():
                    dv = self.D(vb)
                    for k in range(self.rank):
                        if not dv[k].is_zero():
                            out[k] = out[k] + self._half * w_ab * dv[k]
        return out

    def bracket(self, u, v):
        return self.commutator_algebroid().bracket(
            self._section(u), self._section(v))

    def associator(self, u, v, w):
        u, v, w = self._section(u), self._section(v), self._section(w)
        left = self.star(u, self.star(v, w))
        right = self.star(self.star(u, v), w)
        return tuple(x - y for x, y in zip(left, right))

    def section_str(self, coeffs) -> str:
        return section_str(coeffs, self.names)

    def extended(self, stem: str = "f"):
        """Same structure over a context with one fresh function symbol."""
        name = self.ctx.fresh_func_name(stem)
        ext = self.ctx.extended((name,))
        ps = PreSymStructure(ext, self.names, self.anchor, self.table,
                             ExprMatrix(ext, self.pairing.rows))
        if self._inv_pairing is not None:
            ps._inv_pairing = ExprMatrix(ext, self._inv_pairing.rows)
        return ps, ext.function(name)


def operator_D(E: PreSymStructure, f: DiffExpr):
    return E.D(f)


def tensor_T(E: PreSymStructure, u, v, w) -> DiffExpr:
    """(u*v, w) + (u, v*w) - (v*u, w) - (v, u*w)."""
    u, v, w = E._section(u), E._section(v), E._section(w)
    return (E.pairing_value(E.star(u, v), w)
            + E.pairing_value(u, E.star(v, w))
            - E.pairing_value(E.star(v, u), w)
            - E.pairing_value(v, E.star(u, w)))


def _cyclic_T(E: PreSymStructure, u, v, w) -> DiffExpr:
    return tensor_T(E, u, v, w) + tensor_T(E, v, w, u) + tensor_T(E, w, u, v)


def _def_i_residual(E: PreSymStructure, u, v, w):
    """(u,v,w) - (v,u,w) - 1/6 D T(u,v,w), componentwise."""
    sixth = E.ctx.number(Fraction(1, 6))
    a1 = E.associator(u, v, w)
    a2 = E.associator(v, u, w)
    t = tensor_T(E, u, v, w)
    if t.is_zero():
        return tuple(x - y for x, y in zip(a1, a2))
    dt = E.D(t)
    return tuple(x - y - sixth * z for x, y, z in zip(a1, a2, dt))


def _def_ii_residual(E: PreSymStructure, u, v, w) -> DiffExpr:
    """rho(u)(v,w) - (u*v - 1/2 D(u,v), w) - (v, [u,w])."""
    lhs = E.anchor_apply(u, E.pairing_value(v, w))
    s = list(E.star(u, v))
    p = E.pairing_value(u, v)
    if not p.is_zero():
        dp = E.D(p)
        for k in range(E.rank):
            s[k] = s[k] - E._half * dp[k]
    rhs = E.pairing_value(s, w) + E.pairing_value(v, E.bracket(u, w))
    return lhs - rhs


def _first_nonzero(res):
    for k, x in enumerate(res):
        if not x.is_zero():
            return k, x
    return None


def check_presymplectic(E: PreSymStructure, artifact: str = "presym",
                        fast_fail: bool = False) -> CheckReport:
    """The defining identities on frame triples with formal-function slots.

    Both sides of identity (i) are antisymmetric in the first two slots,
    so its pure-frame triples run over a < b and the formal slot-0
    variant (which covers slot 1 by that antisymmetry) over all ordered
    pairs; identity (ii) has no slot symmetry and runs in full.
    """
    rec = Recorder(artifact)
    r = E.rank

    def skew():
        for a in range(r):
            for b in range(a, r):
                res = E.pairing.rows[a][b] + E.pairing.rows[b][a]
                if not res.is_zero():
                    return False, f"(e{a+1},e{b+1}) + (e{b+1},e{a+1}) = {res}"
        return True, None

    ok = rec.run("presym.pairing-skew", skew)
    remaining = ["presym.pairing-nondegenerate", "presym.def-i",
                 "presym.def-ii", "presym.scalar-left", "presym.scalar-right",
                 "presym.bracket-leibniz", "presym.star-with-D",
                 "presym.cyclic-T", "presym.D-reproducing"]
    if not ok and fast_fail:
        for cid in remaining:
            rec.skip(cid, "not evaluated: earlier check failed")
        return rec.report

    def nondegenerate():
        try:
            E.inverse_pairing
        except SingularMatrixError as exc:
            return False, f"pairing determinant vanishes: {exc.determinant}"
        return True, None

    ok = rec.run("presym.pairing-nondegenerate", nondegenerate)
    remaining.pop(0)
    if not ok:
        # D and the section product are undefined without the inverse
        for cid in remaining:
            rec.skip(cid, "not evaluated: pairing is degenerate")
        return rec.report

    ext, f = E.extended()
    frames = [ext.frame_section(a) for a in range(r)]

    def f_slot(a):
        return tuple(f if k == a else ext.ctx.zero() for k in range(r))

    def run_guarded(check_id, fn):
        ok = rec.run(check_id, fn)
        remaining.remove(check_id)
        if not ok and fast_fail:
            for cid in remaining:
                rec.skip(cid, "not evaluated: earlier check failed")
        return not ok and fast_fail

    def d_reproducing():
        df = ext.D(f)
        for b in range(r):
            res = ext.pairing_value(df, frames[b]) \
                - ext.anchor_apply(frames[b], f)
            if not res.is_zero():
                return False, f"(Df,e{b+1}) - rho(e{b+1})(f) = {res}"
        return True, None

    if run_guarded("presym.D-reproducing", d_reproducing):
        return rec.report

    def def_ii():
        for u in range(r):
            for v in range(r):
                for w in range(r):
                    res = _def_ii_residual(ext, frames[u], frames[v],
                                           frames[w])
                    if not res.is_zero():
                        return False, (f"(e{u+1},e{v+1},e{w+1}): "
                                       f"residual {res}")
        for slot in range(3):
            for u in range(r):
                for v in range(r):
                    for w in range(r):
                        args = [frames[u], frames[v], frames[w]]
                        args[slot] = tuple(
                            f * c for c in args[slot])
                        res = _def_ii_residual(ext, *args)
                        if not res.is_zero():
                            return False, (f"(e{u+1},e{v+1},e{w+1}), formal "
                                           f"f in slot {slot+1}: "
                                           f"residual {res}")
        return True, None

    if run_guarded("presym.def-ii", def_ii):
        return rec.report

    def def_i():
        for u in range(r):
            for v in range(u + 1, r):
                for w in range(r):
                    res = _def_i_residual(ext, frames[u], frames[v],
                                          frames[w])
                    bad = _first_nonzero(res)
                    if bad:
                        return False, (f"(e{u+1},e{v+1},e{w+1}): component "
                                       f"{E.names[bad[0]]}: {bad[1]}")
        for u in range(r):
            for v in range(r):
                for w in range(r):
                    res = _def_i_residual(ext, f_slot(u), frames[v],
                                          frames[w])
                    bad = _first_nonzero(res)
                    if bad:
                        return False, (f"(f e{u+1},e{v+1},e{w+1}): component "
                                       f"{E.names[bad[0]]}: {bad[1]}")
        for u in range(r):
            for v in range(u + 1, r):
                for w in range(r):
                    res = _def_i_residual(ext, frames[u], frames[v],
                                          f_slot(w))
                    bad = _first_nonzero(res)
                    if bad:
                        return False, (f"(e{u+1},e{v+1},f e{w+1}): component "
                                       f"{E.names[bad[0]]}: {bad[1]}")
        return True, None

    if run_guarded("presym.def-i", def_i):
        return rec.report

    def scalar_left():
        for a in range(r):
            da = ext.anchor_apply(frames[a], f)
            for b in range(r):
                lhs = ext.star(frames[a], f_slot(b))
                w_ab = ext.pairing.rows[a][b]
                df = ext.D(f) if not w_ab.is_zero() else None
                for k in range(r):
                    rhs = f * ext.table[a][b][k]
                    if k == b:
                        rhs = rhs + da
                    if df is not None:
                        rhs = rhs + ext._half * w_ab * df[k]
                    if not (lhs[k] - rhs).is_zero():
                        return False, (f"e{a+1} * (f e{b+1}), component "
                                       f"{E.names[k]}: {lhs[k] - rhs}")
        return True, None

    if run_guarded("presym.scalar-left", scalar_left):
        return rec.report

    def scalar_right():
        for a in range(r):
            for b in range(r):
                lhs = ext.star(f_slot(a), frames[b])
                w_ab = ext.pairing.rows[a][b]
                df = ext.D(f) if not w_ab.is_zero() else None
                for k in range(r):
                    rhs = f * ext.table[a][b][k]
                    if df is not None:
                        rhs = rhs - ext._half * w_ab * df[k]
                    if not (lhs[k] - rhs).is_zero():
                        return False, (f"(f e{a+1}) * e{b+1}, component "
                                       f"{E.names[k]}: {lhs[k] - rhs}")
        return True, None

    if run_guarded("presym.scalar-right", scalar_right):
        return rec.report

    def bracket_leibniz():
        comm = ext.commutator_algebroid()
        for a in range(r):
            da = ext.anchor_apply(frames[a], f)
            for b in range(r):
                lhs = ext.bracket(frames[a], f_slot(b))
                for k in range(r):
                    rhs = f * comm.table[a][b][k]
                    if k == b:
                        rhs = rhs + da
                    if not (lhs[k] - rhs).is_zero():
                        return False, (f"[e{a+1}, f e{b+1}], component "
                                       f"{E.names[k]}: {lhs[k] - rhs}")
        return True, None

    if run_guarded("presym.bracket-leibniz", bracket_leibniz):
        return rec.report

    def star_with_d():
        df = ext.D(f)
        for a in range(r):
            lhs = ext.star(frames[a], df)
            p = ext.pairing_value(df, frames[a])
            rhs = ext.D(p) if not p.is_zero() else (ext.ctx.zero(),) * r
            for k in range(r):
                res = lhs[k] - ext._half * rhs[k]
                if not res.is_zero():
                    return False, (f"e{a+1} * Df - 1/2 D(Df,e{a+1}), "
                                   f"component {E.names[k]}: {res}")
        return True, None

    if run_guarded("presym.star-with-D", star_with_d):
        return rec.report

    def cyclic_t():
        for u in range(r):
            for v in range(u + 1, r):
                for w in range(v + 1, r):
                    res = _cyclic_T(ext, frames[u], frames[v], frames[w])
                    if not res.is_zero():
                        return False, f"(e{u+1},e{v+1},e{w+1}): {res}"
        for u in range(r):
            for v in range(r):
                for w in range(r):
                    res = _cyclic_T(ext, f_slot(u), frames[v], frames[w])
                    if not res.is_zero():
                        return False, (f"(f e{u+1},e{v+1},e{w+1}): {res}")
        return True, None

    run_guarded("presym.cyclic-T", cyclic_t)
    return rec.report


# ---------------------------------------------------------------------------
# the two correspondence directions


def symplectic_from_presym(E: PreSymStructure):
    """Commutator bracket structure plus the pairing as a 2-form."""
    lie = E.commutator_algebroid()
    comps = {}
    for a in range(E.rank):
        for b in range(a + 1, E.rank):
            w = E.pairing.rows[a][b]
            if not w.is_zero():
                comps[(a, b)] = w
    form = FormField(E.ctx, E.rank, 2, comps)
    return lie, form


def presym_from_symplectic(lie: ChartAlgebroid, form: FormField
                           ) -> PreSymStructure:
    """Solve w(e_a * e_b, .) = rho(e_a)w(e_b, .) + 1/2 rho(.)w(e_a, e_b)
    - w(e_b, [e_a, .]) for the product table; unique by nondegeneracy."""
    if lie.kind != "lie":
        raise ValueError("input must be a bracket (kind 'lie') structure")
    if form.degree != 2 or form.rank != lie.rank:
        raise ValueError("need a 2-form on the same frame")
    r, ctx = lie.rank, lie.ctx
    half = ctx.number(Fraction(1, 2))
    omega = ExprMatrix(ctx, [[form.value_frame((a, b)) for b in range(r)]
                             for a in range(r)])
    try:
        inv = invert(omega)
    except SingularMatrixError as exc:
        raise ValueError(
            f"2-form is degenerate (determinant {exc.determinant})") from exc
    residual = de_rham_d(lie, form)
    if residual.components:
        key = next(iter(sorted(residual.components)))
        raise ValueError(
            f"2-form is not closed: d-component {key} = "
            f"{residual.components[key]}")
    frames = [lie.frame_section(a) for a in range(r)]
    table = []
    for a in range(r):
        row = []
        for b in range(r):
            rhs = []
            for c in range(r):
                t = lie.anchor_apply(frames[a], omega.rows[b][c]) \
                    + half * lie.anchor_apply(frames[c], omega.rows[a][b])
                cell = lie.table[a][c]
                for d in range(r):
                    if not cell[d].is_zero() and \
                            not omega.rows[b][d].is_zero():
                        t = t - cell[d] * omega.rows[b][d]
                rhs.append(t)
            col = inv.mulvec(rhs)
            row.append(tuple(-x for x in col))
        table.append(row)
    return PreSymStructure(ctx, lie.names, lie.anchor, table, omega)


def pseudo_semidirect(A: ChartAlgebroid, dual_names=None) -> PreSymStructure:
    """Rank-2r structure on the frame of A plus its dual frame.

    Frame products: e_a * e_b is the product of A; e_a * f^b transports
    the dual frame along the commutator; f^a * e_b pairs against right
    multiplication; duals multiply to zero.  The pairing is the canonical
    skew block form with (e_a, f^b) = -delta.
    """
    if A.kind != "lsa":
        raise ValueError("expects a product (kind 'lsa') structure")
    r, ctx = A.rank, A.ctx
    if dual_names is None:
        dual_names = tuple(f"f{i + 1}" for i in range(r))
        taken = set(A.names) | set(ctx.coords) | set(ctx.funcs)
        if any(n in taken for n in dual_names):
            dual_names = tuple(f"{n}_dual" for n in A.names)
    dual_names = tuple(dual_names)
    if len(dual_names) != r:
        raise ValueError("need one dual name per frame element")
    names = A.names + dual_names
    comm = A.commutator_algebroid()
    z = ctx.zero()
    n2 = 2 * r

    def zero_cell():
        return [z] * n2

    table = [[zero_cell() for _ in range(n2)] for _ in range(n2)]
    for a in range(r):
        for b in range(r):
            for k in range(r):
                table[a][b][k] = A.table[a][b][k]
                # e_a * f^b = - sum_c [e_a, e_c]^b f^c
                table[a][r + b][r + k] = -comm.table[a][k][b]
                # f^a * e_b = sum_c (e_c * e_b)^a f^c
                table[r + a][b][r + k] = A.table[k][b][a]
    table = [[tuple(cell) for cell in row] for row in table]
    zero_row = [z] * len(ctx.coords)
    anchor = [list(row) for row in A.anchor] + [list(zero_row)
                                                for _ in range(r)]
    one = ctx.one()
    pairing = [[z] * n2 for _ in range(n2)]
    for a in range(r):
        pairing[a][r + a] = -one
        pairing[r + a][a] = one
    return PreSymStructure(ctx, names, anchor, table, pairing)


# ---------------------------------------------------------------------------
# closed isotropic subbundles


class Subbundle:
    """Constant-rank span of sections given by coefficient rows."""

    def __init__(self, sections, names=None):
        self.sections = tuple(tuple(s) for s in sections)
        if not self.sections:
            raise ValueError("need at least one spanning section")
        width = len(self.sections[0])
        if any(len(s) != width for s in self.sections):
            raise ValueError("ragged spanning sections")
        if names is None:
            names = tuple(f"s{i + 1}" for i in range(len(self.sections)))
        self.names = tuple(names)
        if len(self.names) != len(self.sections):
            raise ValueError("need one name per section")


def check_dirac(E: PreSymStructure, F: Subbundle, artifact: str = "dirac"):
    """Isotropy, half rank, closure under the product; on closure, the
    induced structure with its verification report."""
    k, r = len(F.sections), E.rank
    if 2 * k != r:
        raise ValueError(f"subbundle rank {k} is not half of {r}")
    rec = Recorder(artifact)
    ctx = E.ctx
    secs = [tuple(E._expr(x) for x in s) for s in F.sections]
    mat = ExprMatrix(ctx, secs)

    def half_rank():
        got = expr_rank(mat)
        if got != k:
            return False, f"spanning sections have rank {got}, need {k}"
        return True, None

    def isotropic():
        for i in range(k):
            for j in range(i, k):
                p = E.pairing_value(secs[i], secs[j])
                if not p.is_zero():
                    return False, f"({F.names[i]},{F.names[j]}) = {p}"
        return True, None

    ok = rec.run("dirac.half-rank", half_rank)
    ok = rec.run("dirac.isotropic", isotropic) and ok

    span_t = mat.transpose()
    induced_table = [[None] * k for _ in range(k)]

    def closed():
        for i in range(k):
            for j in range(k):
                prod = E.star(secs[i], secs[j])
                coeffs = expr_solve(span_t, list(prod))
                if coeffs is None:
                    return False, (f"{F.names[i]} * {F.names[j]} = "
                                   f"{E.section_str(prod)} leaves the span")
                induced_table[i][j] = tuple(coeffs)
        return True, None

    ok = rec.run("dirac.closed", closed) and ok
    if not ok or any(c is None for row in induced_table for c in row):
        rec.skip("dirac.induced-left-symmetric",
                 "not evaluated: no induced product")
        return rec.report, None

    n = len(ctx.coords)
    ind_anchor = []
    for i in range(k):
        row = []
        for c in range(n):
            acc = ctx.zero()
            for a in range(r):
                if not secs[i][a].is_zero() and not E.anchor[a][c].is_zero():
                    acc = acc + secs[i][a] * E.anchor[a][c]
            row.append(acc)
        ind_anchor.append(row)
    induced = ChartAlgebroid(ctx, F.names, ind_anchor, induced_table,
                             kind="lsa")

    def induced_ok():
        from .algebroid import check_left_symmetric_algebroid
        sub = check_left_symmetric_algebroid(induced, artifact=artifact)
        if sub.passed():
            return True, None
        bad = sub.failures()[0]
        return False, f"{bad.check_id}: {bad.witness}"

    rec.run("dirac.induced-left-symmetric", induced_ok)
    return rec.report, induced
