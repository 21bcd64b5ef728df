"""Skew-paired product structures: axioms, D and T, correspondences,
pseudo-semidirect products, closed isotropic subbundles."""

from fractions import Fraction

import pytest

from psalib.algebroid import (
    ChartAlgebroid,
    FormField,
    check_2cocycle,
    check_lie_algebroid,
)
from psalib.exprcore import ChartContext
from psalib.presym import (
    PreSymStructure,
    Subbundle,
    check_dirac,
    check_presymplectic,
    operator_D,
    presym_from_symplectic,
    pseudo_semidirect,
    symplectic_from_presym,
    tensor_T,
)


def r2_standard() -> PreSymStructure:
    """Flat plane: all frame products zero, pairing dx1^dx2."""
    ctx = ChartContext(coords=("x1", "x2"))
    z = ctx.zero()
    cell = (z, z)
    table = [[cell, cell], [cell, cell]]
    return PreSymStructure(ctx, ("d1", "d2"), [[1, 0], [0, 1]], table,
                           [[0, 1], [-1, 0]])


def sphere_presym() -> PreSymStructure:
    ctx = ChartContext(coords=("x", "y", "z"))
    e = ctx.expr
    z2 = (ctx.zero(), ctx.zero())
    s12 = (e("-z/(2*y)"), e("-x/(2*y)"))
    s21 = (e("z/(2*y)"), e("x/(2*y)"))
    table = [[z2, s12], [s21, z2]]
    anchor = [[e("y"), e("-x"), e("0")], [e("0"), e("z"), e("-y")]]
    return PreSymStructure(ctx, ("e1", "e2"), anchor, table,
                           [[ctx.zero(), e("y")], [e("-y"), ctx.zero()]])


def bisection_lie():
    """Cotangent bracket structure of the bivector (1+x^2) dx^dy."""
    ctx = ChartContext(coords=("x", "y"))
    e = ctx.expr
    z2 = (ctx.zero(), ctx.zero())
    table = [[z2, (e("2*x"), ctx.zero())], [(e("-2*x"), ctx.zero()), z2]]
    anchor = [[ctx.zero(), e("1 + x^2")], [e("-(1 + x^2)"), ctx.zero()]]
    lie = ChartAlgebroid(ctx, ("e1", "e2"), anchor, table, kind="lie")
    form = FormField(ctx, 2, 2, {(0, 1): e("1 + x^2")})
    return lie, form


def point_lsa2() -> ChartAlgebroid:
    """dim-2 product e1*e2 = e2 over a point chart."""
    ctx = ChartContext(coords=())
    z2 = (ctx.zero(), ctx.zero())
    table = [[z2, (ctx.zero(), ctx.one())], [z2, z2]]
    return ChartAlgebroid(ctx, ("e1", "e2"), [[], []], table, kind="lsa")


def prolongation_so3():
    """Rank-6 prolongation of so3 over its dual chart (y1,y2,y3)."""
    ctx = ChartContext(coords=("y1", "y2", "y3"))
    z = ctx.zero()
    one = ctx.one()
    names = ("t1", "t2", "t3", "b1", "b2", "b3")
    eps = {(0, 1, 2): 1, (1, 2, 0): 1, (2, 0, 1): 1,
           (1, 0, 2): -1, (2, 1, 0): -1, (0, 2, 1): -1}
    z6 = (z,) * 6

    def t_cell(a, b):
        out = [z] * 6
        for c in range(3):
            s = eps.get((a, b, c))
            if s:
                out[c] = ctx.number(s)
        return tuple(out)

    table = [[z6] * 6 for _ in range(6)]
    for a in range(3):
        for b in range(3):
            table[a][b] = t_cell(a, b)
    anchor = [[z, z, z]] * 3 + [
        [one, z, z], [z, one, z], [z, z, one]]
    lie = ChartAlgebroid(ctx, names, anchor, table, kind="lie")
    comps = {
        (0, 1): ctx.expr("y3"), (0, 2): ctx.expr("-y2"),
        (1, 2): ctx.expr("y1"),
        (0, 3): one, (1, 4): one, (2, 5): one,
    }
    form = FormField(ctx, 6, 2, comps)
    return lie, form


# ---------------------------------------------------------------------------
# operator D


def test_d_on_flat_plane():
    E = r2_standard()
    ctx = E.ctx
    d = operator_D(E, ctx.expr("x1"))
    assert d[0].is_zero() and d[1] == ctx.expr("-1")
    d = operator_D(E, ctx.expr("x2"))
    assert d[0] == ctx.one() and d[1].is_zero()
    d = operator_D(E, ctx.number(Fraction(5, 3)))
    assert all(x.is_zero() for x in d)


def test_d_duality_and_leibniz_formal():
    E = sphere_presym()
    ext, f = E.extended()
    ext2, g = ext.extended("g")
    df, dg = ext2.D(f), ext2.D(g)
    dfg = ext2.D(f * g)
    for k in range(2):
        assert (dfg[k] - f * dg[k] - g * df[k]).is_zero()
    for b in range(2):
        res = ext.pairing_value(ext.D(f), ext.frame_section(b)) \
            - ext.anchor_apply(ext.frame_section(b), f)
        assert res.is_zero()


def test_d_degenerate_pairing_rejected():
    ctx = ChartContext(coords=("x", "y"))
    z = ctx.zero()
    cell = (z, z)
    E = PreSymStructure(ctx, ("d1", "d2"), [[1, 0], [0, 1]],
                        [[cell, cell], [cell, cell]],
                        [[0, 0], [0, 0]])
    rep = check_presymplectic(E)
    assert rep.find("presym.pairing-nondegenerate").status == "fail"
    assert rep.find("presym.def-i").status == "skipped"


# ---------------------------------------------------------------------------
# tensor T


def test_t_vanishes_on_abelian_point():
    ctx = ChartContext(coords=())
    z2 = (ctx.zero(), ctx.zero())
    E = PreSymStructure(ctx, ("e1", "e2"), [[], []],
                        [[z2, z2], [z2, z2]], [[0, 1], [-1, 0]])
    for a in range(2):
        for b in range(2):
            for c in range(2):
                assert tensor_T(E, a, b, c).is_zero()


def test_t_vanishes_on_flat_plane_frames():
    E = r2_standard()
    for a in range(2):
        for b in range(2):
            for c in range(2):
                assert tensor_T(E, a, b, c).is_zero()


def test_t_sphere_two_routes():
    """Definition route vs the closed form
    3([u,v],w) + 3/2 rho(v)(u,w) - 3/2 rho(u)(v,w)."""
    E = sphere_presym()
    three = E.ctx.number(3)
    half3 = E.ctx.number(Fraction(3, 2))
    for a in range(2):
        for b in range(2):
            for c in range(2):
                u, v, w = (E.frame_section(i) for i in (a, b, c))
                direct = tensor_T(E, u, v, w)
                closed = (three * E.pairing_value(E.bracket(u, v), w)
                          + half3 * E.anchor_apply(v, E.pairing_value(u, w))
                          - half3 * E.anchor_apply(u, E.pairing_value(v, w)))
                assert (direct - closed).is_zero()
    assert tensor_T(E, 0, 1, 0) == E.ctx.expr("3/2*x")


def test_cyclic_t_is_a_report_check():
    rep = check_presymplectic(sphere_presym())
    assert rep.find("presym.cyclic-T").status == "pass"


# ---------------------------------------------------------------------------
# the axiom suite


def test_flat_plane_passes():
    assert check_presymplectic(r2_standard()).passed()


def test_sphere_passes():
    assert check_presymplectic(sphere_presym()).passed()


def test_sphere_star_perturbation_fails():
    E = sphere_presym()
    table = [[list(cell) for cell in row] for row in E.table]
    table[0][1][0] = table[0][1][0] + E.ctx.one()
    bad = PreSymStructure(E.ctx, E.names, E.anchor, table, E.pairing)
    rep = check_presymplectic(bad, fast_fail=True)
    assert not rep.passed()
    assert rep.failures()[0].witness


def test_pairing_skew_enforced():
    ctx = ChartContext(coords=("x", "y"))
    z = ctx.zero()
    cell = (z, z)
    E = PreSymStructure(ctx, ("d1", "d2"), [[1, 0], [0, 1]],
                        [[cell, cell], [cell, cell]],
                        [[1, 1], [-1, 0]])
    rep = check_presymplectic(E)
    assert rep.find("presym.pairing-skew").status == "fail"


# ---------------------------------------------------------------------------
# correspondence, both directions


def test_sphere_to_bracket_and_back():
    E = sphere_presym()
    lie, form = symplectic_from_presym(E)
    assert check_lie_algebroid(lie).passed()
    assert check_2cocycle(lie, form).passed()
    got = lie.table[0][1]
    want = (E.ctx.expr("-z/y"), E.ctx.expr("-x/y"))
    assert all((a - b).is_zero() for a, b in zip(got, want))
    back = presym_from_symplectic(lie, form)
    for a in range(2):
        for b in range(2):
            for k in range(2):
                assert (back.table[a][b][k] - E.table[a][b][k]).is_zero()
    assert (back.pairing.rows[0][1] - E.pairing.rows[0][1]).is_zero()


def test_flat_plane_to_star_table():
    """The derived product on the flat plane is identically zero on
    frames; the f-multiple lines then follow from the extension rules."""
    ctx = ChartContext(coords=("x1", "x2"))
    z2 = (ctx.zero(), ctx.zero())
    lie = ChartAlgebroid(ctx, ("d1", "d2"), [[1, 0], [0, 1]],
                         [[z2, z2], [z2, z2]], kind="lie")
    form = FormField(ctx, 2, 2, {(0, 1): ctx.one()})
    E = presym_from_symplectic(lie, form)
    for a in range(2):
        for b in range(2):
            assert all(x.is_zero() for x in E.table[a][b])
    assert check_presymplectic(E).passed()


def test_bisection_star_matches_hand_table():
    lie, form = bisection_lie()
    E = presym_from_symplectic(lie, form)
    ctx = lie.ctx
    assert E.table[0][1][0] == ctx.expr("x")
    assert E.table[0][1][1].is_zero()
    assert E.table[1][0][0] == ctx.expr("-x")
    assert E.table[1][0][1].is_zero()
    assert all(x.is_zero() for x in E.table[0][0])
    assert all(x.is_zero() for x in E.table[1][1])
    assert check_presymplectic(E).passed()


def test_degenerate_or_nonclosed_form_rejected():
    ctx = ChartContext(coords=("x1", "x2"))
    z2 = (ctx.zero(), ctx.zero())
    lie = ChartAlgebroid(ctx, ("d1", "d2"), [[1, 0], [0, 1]],
                         [[z2, z2], [z2, z2]], kind="lie")
    with pytest.raises(ValueError, match="degenerate"):
        presym_from_symplectic(lie, FormField(ctx, 2, 2, {}))
    # a nondegenerate non-closed form needs even rank and >= 3 coords
    ctx3 = ChartContext(coords=("x1", "x2", "x3"))
    z4 = (ctx3.zero(),) * 4
    row = [z4, z4, z4, z4]
    anchor = [[1, 0, 0], [0, 1, 0], [0, 0, 1], [0, 0, 0]]
    lie4 = ChartAlgebroid(ctx3, ("d1", "d2", "d3", "d4"), anchor,
                          [list(row) for _ in range(4)], kind="lie")
    bad = FormField(ctx3, 4, 2, {(0, 1): ctx3.expr("x3"), (0, 2): ctx3.one(),
                                 (1, 3): ctx3.one()})
    with pytest.raises(ValueError, match="not closed"):
        presym_from_symplectic(lie4, bad)


def test_prolongation_table_unambiguous_entries():
    lie, form = prolongation_so3()
    assert check_lie_algebroid(lie).passed()
    E = presym_from_symplectic(lie, form)
    eps = {(0, 1, 2): 1, (1, 2, 0): 1, (2, 0, 1): 1,
           (1, 0, 2): -1, (2, 1, 0): -1, (0, 2, 1): -1}
    for k in range(3):
        for m in range(3):
            for out in range(3):
                want = -eps.get((k, out, m), 0)
                got = E.table[k][3 + m][3 + out]
                assert (got - E.ctx.number(want)).is_zero()
                got = E.table[3 + m][k][3 + out]
                assert (got - E.ctx.number(want)).is_zero()
            # nothing lands on the tangent-lift part
            assert all(E.table[k][3 + m][c].is_zero() for c in range(3))
    for a in range(3):
        for b in range(3):
            assert all(x.is_zero() for x in E.table[3 + a][3 + b])


def test_round_trip_bracket_to_star_to_bracket():
    lie, form = bisection_lie()
    E = presym_from_symplectic(lie, form)
    lie2, form2 = symplectic_from_presym(E)
    for a in range(2):
        for b in range(2):
            for k in range(2):
                assert (lie2.table[a][b][k] - lie.table[a][b][k]).is_zero()
    assert form2.components == form.components


# ---------------------------------------------------------------------------
# pseudo-semidirect products


def test_semidirect_lsa2_table():
    E = pseudo_semidirect(point_lsa2())
    assert E.names == ("e1", "e2", "f1", "f2")
    one = E.ctx.one()
    nonzero = {
        (0, 1, 1): one,     # e1 * e2 = e2
        (0, 3, 3): -one,    # e1 * f2 = -f2
        (1, 3, 2): one,     # e2 * f2 = f1
        (3, 1, 2): one,     # f2 * e2 = f1
    }
    for a in range(4):
        for b in range(4):
            for k in range(4):
                want = nonzero.get((a, b, k))
                got = E.table[a][b][k]
                if want is None:
                    assert got.is_zero(), (a, b, k)
                else:
                    assert (got - want).is_zero()
    assert E.pairing.rows[0][2] == E.ctx.expr("-1")
    assert E.pairing.rows[2][0] == one
    assert check_presymplectic(E).passed()


def test_semidirect_flat_line_restricts_to_connection():
    """Over the 1-dim chart with coefficient x, the product restricted
    to the base frame is the connection and D(f) = (0, +df/dx)."""
    ctx = ChartContext(coords=("x",))
    alg = ChartAlgebroid(ctx, ("d1",), [[1]], [[(ctx.expr("x"),)]],
                         kind="lsa")
    E = pseudo_semidirect(alg)
    assert E.table[0][0][0] == ctx.expr("x")
    assert E.table[0][0][1].is_zero()
    assert E.table[1][0][1] == ctx.expr("x")   # f1 * d1 = x f1
    assert all(x.is_zero() for x in E.table[0][1])  # d1 * f1 = 0
    assert check_presymplectic(E).passed()
    ext, f = E.extended()
    df = ext.D(f)
    assert df[0].is_zero()
    from psalib.exprcore import differentiate
    assert (df[1] - differentiate(f, "x")).is_zero()


def test_semidirect_rejects_bracket_input():
    lie, _ = bisection_lie()
    with pytest.raises(ValueError):
        pseudo_semidirect(lie)


# ---------------------------------------------------------------------------
# closed isotropic subbundles


def test_dirac_base_and_dual_of_semidirect():
    E = pseudo_semidirect(point_lsa2())
    one, z = E.ctx.one(), E.ctx.zero()
    base = Subbundle([(one, z, z, z), (z, one, z, z)], names=("e1", "e2"))
    rep, induced = check_dirac(E, base)
    assert rep.passed()
    assert induced is not None
    assert induced.table[0][1][1] == one    # recovered e1*e2 = e2
    assert all(induced.table[a][b][k].is_zero()
               for a in range(2) for b in range(2) for k in range(2)
               if (a, b, k) != (0, 1, 1))
    dual = Subbundle([(z, z, one, z), (z, z, z, one)])
    rep, induced = check_dirac(E, dual)
    assert rep.passed()
    assert all(induced.table[a][b][k].is_zero()
               for a in range(2) for b in range(2) for k in range(2))


def test_dirac_rejects_nonisotropic():
    E = r2_standard()
    one, z = E.ctx.one(), E.ctx.zero()
    F = Subbundle([(one, z)])
    rep, induced = check_dirac(E, F)
    # span(d1) alone: isotropic but closure trivial; build the bad case
    assert rep.find("dirac.isotropic").status == "pass"
    with pytest.raises(ValueError):
        check_dirac(E, Subbundle([(one, z), (z, one), (one, one)]))
    Esd = pseudo_semidirect(point_lsa2())
    o, zz = Esd.ctx.one(), Esd.ctx.zero()
    # span(e1, f1) pairs to (e1, f1) = -1
    rep, _ = check_dirac(Esd, Subbundle([(o, zz, zz, zz), (zz, zz, o, zz)]))
    assert rep.find("dirac.isotropic").status == "fail"


def test_dirac_closure_failure_reported():
    """A graph over the base that the product pushes off itself."""
    E = pseudo_semidirect(point_lsa2())
    one, z = E.ctx.one(), E.ctx.zero()
    # span(e1 + f2, e2): isotropic? (e1+f2, e2) = omega(f2, e2) = <f2,e2> = 1
    F = Subbundle([(one, z, z, one), (z, one, z, z)])
    rep, induced = check_dirac(E, F)
    assert not rep.passed()
