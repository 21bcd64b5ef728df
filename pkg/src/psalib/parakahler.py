"""Product structures compatible with the pairing, the pseudo-metric they
induce, Levi-Civita connections on the commutator structure, and the
identity between the metric connection and the product on both
eigenbundles."""

from fractions import Fraction

from .algebroid import ChartAlgebroid
from .exactlinalg import (ExprMatrix, SingularMatrixError, expr_kernel_basis,
                          expr_rank, expr_solve, invert)
from .exprcore import ChartContext, DiffExpr
from .presym import PreSymStructure, Subbundle, check_dirac
from .report import CheckReport, Recorder

__all__ = [
    "ParaComplexOp", "MetricField", "EConnection", "check_paracomplex",
    "metric_from", "check_metric", "levi_civita", "check_levi_civita",
    "check_star_equals_nabla", "check_parakahler",
]


class ParaComplexOp:
    """Bundle endomorphism in frame coordinates: P(e_b) = sum_a m[a][b] e_a."""

    def __init__(self, ctx: ChartContext, matrix):
        if not isinstance(matrix, ExprMatrix):
            matrix = ExprMatrix(ctx, matrix)
        if matrix.nrows != matrix.ncols:
            raise ValueError("operator matrix must be square")
        self.ctx = ctx
        self.matrix = matrix
        self.rank = matrix.nrows

    def apply(self, u):
        u = tuple(u)
        if len(u) != self.rank:
            raise ValueError("section length mismatch")
        return tuple(self.matrix.mulvec(u))

    def column(self, b: int):
        return tuple(self.matrix.rows[a][b] for a in range(self.rank))


class MetricField:
    """Symmetric nondegenerate frame pairing g_ab."""

    def __init__(self, ctx: ChartContext, matrix):
        if not isinstance(matrix, ExprMatrix):
            matrix = ExprMatrix(ctx, matrix)
        if matrix.nrows != matrix.ncols:
            raise ValueError("metric matrix must be square")
        self.ctx = ctx
        self.matrix = matrix
        self.rank = matrix.nrows
        self._inv = None

    @property
    def inverse(self) -> ExprMatrix:
        if self._inv is None:
            self._inv = invert(self.matrix)
        return self._inv

    def value(self, u, v) -> DiffExpr:
        out = self.ctx.zero()
        rows = self.matrix.rows
        for a in range(self.rank):
            if u[a].is_zero():
                continue
            for b in range(self.rank):
                if not v[b].is_zero() and not rows[a][b].is_zero():
                    out = out + u[a] * rows[a][b] * v[b]
        return out


class EConnection:
    """Frame connection on an algebroid: nabla_{e_a} e_b = sum_c g[a][b][c] e_c,
    extended to sections by anchor-Leibniz in the second slot."""

    def __init__(self, alg: ChartAlgebroid, gamma):
        self.alg = alg
        self.ctx = alg.ctx
        r = alg.rank
        self.gamma = tuple(
            tuple(tuple(x if isinstance(x, DiffExpr) else alg.ctx.number(x)
                        for x in cell) for cell in row) for row in gamma)
        if len(self.gamma) != r or any(
                len(row) != r or any(len(c) != r for c in row)
                for row in self.gamma):
            raise ValueError("connection coefficients must be rank^3")

    def frame(self, a: int, b: int):
        return self.gamma[a][b]

    def apply(self, u, v):
        r = self.alg.rank
        out = [self.ctx.zero()] * r
        for c in range(r):
            out[c] = self.alg.anchor_apply(u, v[c])
        for a in range(r):
            if u[a].is_zero():
                continue
            for b in range(r):
                if v[b].is_zero():
                    continue
                cell = self.gamma[a][b]
                for c in range(r):
                    if not cell[c].is_zero():
                        out[c] = out[c] + u[a] * v[b] * cell[c]
        return tuple(out)


def _first_residual(vals, names):
    for k, x in enumerate(vals):
        if not x.is_zero():
            return f"component {names[k]}: {x}"
    return None


def check_paracomplex(E: PreSymStructure, P: ParaComplexOp,
                      artifact: str = "para"):
    """(report, plus bundle, minus bundle); the square-to-identity check
    runs first and gates the rest."""
    rec = Recorder(artifact)
    r = E.rank
    if P.rank != r:
        raise ValueError("operator rank does not match the structure")
    ctx = E.ctx
    eye = ExprMatrix.identity(ctx, r)

    def squares():
        sq = P.matrix.matmul(P.matrix)
        for a in range(r):
            for b in range(r):
                want = ctx.one() if a == b else ctx.zero()
                res = sq.rows[a][b] - want
                if not res.is_zero():
                    return False, f"(P o P - id)[{a+1}][{b+1}] = {res}"
        return True, None

    if not rec.run("para.squares-to-identity", squares):
        for cid in ("para.pairing-anti-invariance", "para.integrable",
                    "para.eigen-split", "para.eigen-dirac-plus",
                    "para.eigen-dirac-minus"):
            rec.skip(cid, "not evaluated: P does not square to the identity")
        return rec.report, None, None

    def anti_invariance():
        lhs = P.matrix.transpose().matmul(E.pairing).matmul(P.matrix)
        res_m = lhs.add(E.pairing)
        for a in range(r):
            for b in range(r):
                if not res_m.rows[a][b].is_zero():
                    return False, (f"(P e{a+1}, P e{b+1}) + (e{a+1}, e{b+1})"
                                   f" = {res_m.rows[a][b]}")
        return True, None

    rec.run("para.pairing-anti-invariance", anti_invariance)

    def integrable():
        ext, f = E.extended()
        Pext = ParaComplexOp(ext.ctx, [[x for x in row]
                                       for row in P.matrix.rows])
        frames = [ext.frame_section(a) for a in range(r)]
        for a in range(r):
            for b in range(r):
                for fslot in (None, 0, 1):
                    u = frames[a]
                    v = frames[b]
                    if fslot == 0:
                        u = tuple(f * x for x in u)
                    elif fslot == 1:
                        v = tuple(f * x for x in v)
                    lhs = Pext.apply(ext.star(u, v))
                    rhs1 = ext.star(Pext.apply(u), v)
                    rhs2 = ext.star(u, Pext.apply(v))
                    rhs3 = Pext.apply(ext.star(Pext.apply(u),
                                               Pext.apply(v)))
                    res = tuple(lhs[k] - rhs1[k] - rhs2[k] + rhs3[k]
                                for k in range(r))
                    w = _first_residual(res, ext.names)
                    if w is not None:
                        tag = {None: "", 0: "f on slot 1, ",
                               1: "f on slot 2, "}[fslot]
                        return False, f"({tag}e{a+1}, e{b+1}) {w}"
        return True, None

    rec.run("para.integrable", integrable)

    plus_vecs = expr_kernel_basis(P.matrix.sub(eye))
    minus_vecs = expr_kernel_basis(P.matrix.add(eye))

    def eigen_split():
        if 2 * len(plus_vecs) != r or 2 * len(minus_vecs) != r:
            return False, (f"eigenbundle ranks {len(plus_vecs)} and "
                           f"{len(minus_vecs)}, need {r // 2} each")
        stacked = ExprMatrix(ctx, [list(v) for v in plus_vecs] +
                             [list(v) for v in minus_vecs])
        got = expr_rank(stacked)
        if got != r:
            return False, f"eigenbundles together span rank {got}, need {r}"
        return True, None

    ok = rec.run("para.eigen-split", eigen_split)
    if not ok:
        rec.skip("para.eigen-dirac-plus", "not evaluated: eigenbundles "
                 "do not split the structure")
        rec.skip("para.eigen-dirac-minus", "not evaluated: eigenbundles "
                 "do not split the structure")
        return rec.report, None, None

    half = r // 2
    plus = Subbundle(plus_vecs, names=[f"p{i+1}" for i in range(half)])
    minus = Subbundle(minus_vecs, names=[f"m{i+1}" for i in range(half)])
    for cid, bundle in (("para.eigen-dirac-plus", plus),
                        ("para.eigen-dirac-minus", minus)):
        sub_report, _ = check_dirac(E, bundle)
        bad = [c for c in sub_report.checks if c.status == "fail"]

        def dirac_ok(bad=bad):
            if bad:
                return False, f"{bad[0].check_id}: {bad[0].witness}"
            return True, None

        rec.run(cid, dirac_ok)
    return rec.report, plus, minus


def metric_from(E: PreSymStructure, P: ParaComplexOp) -> MetricField:
    """g(x, y) = (x, P y), the pairing twisted by the product structure."""
    g = E.pairing.matmul(P.matrix)
    for a in range(E.rank):
        for b in range(a + 1, E.rank):
            if not (g.rows[a][b] - g.rows[b][a]).is_zero():
                raise ValueError(
                    f"induced metric is not symmetric at ({a+1},{b+1})")
    m = MetricField(E.ctx, g)
    try:
        m.inverse
    except SingularMatrixError as exc:
        raise ValueError(f"induced metric is degenerate: {exc}") from exc
    return m


def check_metric(E: PreSymStructure, P: ParaComplexOp,
                 artifact: str = "para"):
    """Symmetry, nondegeneracy, anti-invariance, and recovery of the
    pairing; returns the metric when it exists."""
    rec = Recorder(artifact)
    g = E.pairing.matmul(P.matrix)
    r = E.rank

    def symmetric():
        for a in range(r):
            for b in range(a + 1, r):
                res = g.rows[a][b] - g.rows[b][a]
                if not res.is_zero():
                    return False, f"g[{a+1}][{b+1}] - g[{b+1}][{a+1}] = {res}"
        return True, None

    metric_holder = []

    def nondegenerate():
        try:
            m = MetricField(E.ctx, g)
            m.inverse
        except SingularMatrixError as exc:
            return False, f"determinant {exc.determinant}"
        metric_holder.append(m)
        return True, None

    def p_anti():
        lhs = P.matrix.transpose().matmul(g).matmul(P.matrix)
        res_m = lhs.add(g)
        for a in range(r):
            for b in range(r):
                if not res_m.rows[a][b].is_zero():
                    return False, (f"g(P e{a+1}, P e{b+1}) + g(e{a+1}, "
                                   f"e{b+1}) = {res_m.rows[a][b]}")
        return True, None

    def recovers_pairing():
        back = g.matmul(P.matrix)
        res_m = back.sub(E.pairing)
        for a in range(r):
            for b in range(r):
                if not res_m.rows[a][b].is_zero():
                    return False, (f"g(e{a+1}, P e{b+1}) - (e{a+1}, e{b+1}) "
                                   f"= {res_m.rows[a][b]}")
        return True, None

    ok = rec.run("para.metric-symmetric", symmetric)
    ok = rec.run("para.metric-nondegenerate", nondegenerate) and ok
    rec.run("para.metric-P-anti", p_anti)
    rec.run("para.form-from-metric", recovers_pairing)
    metric = metric_holder[0] if (ok and metric_holder) else None
    return rec.report, metric


def levi_civita(L: ChartAlgebroid, g: MetricField,
                method: str = "koszul") -> EConnection:
    """The unique torsion-free metric frame connection on a bracket
    structure, solved either from the doubled-product expansion or as one
    linear system in all coefficients."""
    if L.kind != "lie":
        raise ValueError("expects a bracket (kind 'lie') structure")
    if g.rank != L.rank:
        raise ValueError("metric rank mismatch")
    if method == "koszul":
        return _levi_civita_koszul(L, g)
    if method == "linear-system":
        return _levi_civita_linear(L, g)
    raise ValueError("method must be 'koszul' or 'linear-system'")


def _levi_civita_koszul(L: ChartAlgebroid, g: MetricField) -> EConnection:
    r = L.rank
    ctx = L.ctx
    half = ctx.number(Fraction(1, 2))
    frames = [L.frame_section(a) for a in range(r)]
    ginv = g.inverse
    gamma = []
    for a in range(r):
        row = []
        for b in range(r):
            rhs = []
            for c in range(r):
                acc = L.anchor_apply(frames[a], g.matrix.rows[b][c]) \
                    + L.anchor_apply(frames[b], g.matrix.rows[a][c]) \
                    - L.anchor_apply(frames[c], g.matrix.rows[a][b])
                br_ca = L.table[c][a]
                br_cb = L.table[c][b]
                br_ab = L.table[a][b]
                for k in range(r):
                    if not br_ca[k].is_zero():
                        acc = acc + br_ca[k] * g.matrix.rows[k][b]
                    if not br_cb[k].is_zero():
                        acc = acc + br_cb[k] * g.matrix.rows[k][a]
                    if not br_ab[k].is_zero():
                        acc = acc + br_ab[k] * g.matrix.rows[k][c]
                rhs.append(half * acc)
            row.append(tuple(ginv.mulvec(rhs)))
        gamma.append(tuple(row))
    return EConnection(L, gamma)


def _levi_civita_linear(L: ChartAlgebroid, g: MetricField) -> EConnection:
    """Metric compatibility plus zero torsion as one sparse linear system
    over all rank^3 coefficients."""
    r = L.rank
    ctx = L.ctx
    z = ctx.zero()
    nvars = r * r * r

    def var(a, b, c):
        return (a * r + b) * r + c

    rows, rhs = [], []
    frames = [L.frame_section(a) for a in range(r)]
    for a in range(r):
        for b in range(r):
            for c in range(r):
                row = [z] * nvars
                for j in range(r):
                    if not g.matrix.rows[j][c].is_zero():
                        row[var(a, b, j)] = row[var(a, b, j)] \
                            + g.matrix.rows[j][c]
                    if not g.matrix.rows[b][j].is_zero():
                        row[var(a, c, j)] = row[var(a, c, j)] \
                            + g.matrix.rows[b][j]
                rows.append(row)
                rhs.append(L.anchor_apply(frames[a], g.matrix.rows[b][c]))
    one = ctx.one()
    for a in range(r):
        for b in range(a + 1, r):
            for c in range(r):
                row = [z] * nvars
                row[var(a, b, c)] = one
                row[var(b, a, c)] = -one
                rows.append(row)
                rhs.append(L.table[a][b][c])
    sol = expr_solve(ExprMatrix(ctx, rows), rhs)
    if sol is None:
        raise ValueError("connection conditions are inconsistent")
    gamma = [[[sol[var(a, b, c)] for c in range(r)] for b in range(r)]
             for a in range(r)]
    return EConnection(L, gamma)


def check_levi_civita(L: ChartAlgebroid, g: MetricField,
                      artifact: str = "para"):
    """Builds the connection by both routes and verifies the defining
    residuals; returns (report, connection or None)."""
    rec = Recorder(artifact)
    try:
        nabla = levi_civita(L, g, method="koszul")
    except (SingularMatrixError, ValueError) as exc:
        def failed():
            return False, str(exc)
        rec.run("para.levi-civita-agreement", failed)
        return rec.report, None
    r = L.rank
    frames = [L.frame_section(a) for a in range(r)]

    def agreement():
        other = levi_civita(L, g, method="linear-system")
        for a in range(r):
            for b in range(r):
                for c in range(r):
                    res = nabla.gamma[a][b][c] - other.gamma[a][b][c]
                    if not res.is_zero():
                        return False, (f"coefficient ({a+1},{b+1},{c+1}) "
                                       f"differs between solves: {res}")
        return True, None

    def torsion_free():
        for a in range(r):
            for b in range(a + 1, r):
                lhs = L.bracket(frames[a], frames[b])
                fwd = nabla.apply(frames[a], frames[b])
                bwd = nabla.apply(frames[b], frames[a])
                res = tuple(lhs[k] - fwd[k] + bwd[k] for k in range(r))
                w = _first_residual(res, L.names)
                if w is not None:
                    return False, f"([e{a+1},e{b+1}] - nabla asym) {w}"
        return True, None

    def metric_compat():
        for a in range(r):
            for b in range(r):
                for c in range(r):
                    lhs = L.anchor_apply(frames[a], g.matrix.rows[b][c])
                    gb = nabla.apply(frames[a], frames[b])
                    gc = nabla.apply(frames[a], frames[c])
                    res = lhs - g.value(gb, frames[c]) \
                        - g.value(frames[b], gc)
                    if not res.is_zero():
                        return False, (f"rho(e{a+1}) g(e{b+1},e{c+1}) "
                                       f"defect: {res}")
        return True, None

    rec.run("para.levi-civita-agreement", agreement)
    rec.run("para.torsion-free", torsion_free)
    rec.run("para.metric-compatible", metric_compat)
    return rec.report, nabla


def check_star_equals_nabla(E: PreSymStructure, P: ParaComplexOp,
                            artifact: str = "para") -> CheckReport:
    """Metric connection of the commutator structure restricted to each
    eigenbundle agrees with the product; includes the commutation of the
    connection with P and g-isotropy of the eigenbundles."""
    para_report, plus, minus = check_paracomplex(E, P, artifact=artifact)
    rec = Recorder(artifact)
    for c in para_report.checks:
        rec.add(c.check_id, c.status, c.witness, c.wall_ms)
    if plus is None or minus is None or not para_report.passed():
        for cid in ("para.eigen-g-isotropic", "para.nabla-P-commute",
                    "para.star-equals-nabla-plus",
                    "para.star-equals-nabla-minus"):
            rec.skip(cid, "not evaluated: product structure checks failed")
        return rec.report
    metric_report, g = check_metric(E, P, artifact=artifact)
    for c in metric_report.checks:
        rec.add(c.check_id, c.status, c.witness, c.wall_ms)
    if g is None:
        for cid in ("para.eigen-g-isotropic", "para.nabla-P-commute",
                    "para.star-equals-nabla-plus",
                    "para.star-equals-nabla-minus"):
            rec.skip(cid, "not evaluated: no induced metric")
        return rec.report
    L = E.commutator_algebroid()
    lc_report, nabla = check_levi_civita(L, g, artifact=artifact)
    for c in lc_report.checks:
        rec.add(c.check_id, c.status, c.witness, c.wall_ms)
    if nabla is None:
        for cid in ("para.eigen-g-isotropic", "para.nabla-P-commute",
                    "para.star-equals-nabla-plus",
                    "para.star-equals-nabla-minus"):
            rec.skip(cid, "not evaluated: no metric connection")
        return rec.report
    r = E.rank
    frames = [E.frame_section(a) for a in range(r)]

    def g_isotropic():
        for tag, bundle in (("+1", plus), ("-1", minus)):
            secs = bundle.sections
            for i in range(len(secs)):
                for j in range(i, len(secs)):
                    res = g.value(secs[i], secs[j])
                    if not res.is_zero():
                        return False, (f"{tag} eigenbundle sections "
                                       f"{i+1},{j+1}: g = {res}")
        return True, None

    def nabla_P():
        for a in range(r):
            for b in range(r):
                lhs = nabla.apply(frames[a], P.apply(frames[b]))
                rhs = P.apply(nabla.apply(frames[a], frames[b]))
                res = tuple(lhs[k] - rhs[k] for k in range(r))
                w = _first_residual(res, E.names)
                if w is not None:
                    return False, f"(e{a+1}, e{b+1}) {w}"
        return True, None

    rec.run("para.eigen-g-isotropic", g_isotropic)
    rec.run("para.nabla-P-commute", nabla_P)

    def star_match(bundle):
        def inner():
            secs = bundle.sections
            for i in range(len(secs)):
                for j in range(len(secs)):
                    star = E.star(secs[i], secs[j])
                    nab = nabla.apply(secs[i], secs[j])
                    res = tuple(star[k] - nab[k] for k in range(r))
                    w = _first_residual(res, E.names)
                    if w is not None:
                        return False, f"sections {i+1},{j+1}: {w}"
            return True, None
        return inner

    rec.run("para.star-equals-nabla-plus", star_match(plus))
    rec.run("para.star-equals-nabla-minus", star_match(minus))
    return rec.report


def check_parakahler(E: PreSymStructure, P: ParaComplexOp,
                     artifact: str = "para") -> CheckReport:
    """The full product-structure suite; equivalent to
    check_star_equals_nabla, named for the CLI."""
    return check_star_equals_nabla(E, P, artifact=artifact)
