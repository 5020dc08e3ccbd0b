"""
Tests for solver module.

Tests the Gröbner basis read off the eliminated template, normal forms, the
action matrix and the solve pipeline against the determinant oracle.
"""

from dataclasses import replace

import numpy as np
import pytest
from scipy.linalg import LinAlgError, eig

from vertical_relpose import solver
from vertical_relpose.coplanarity import (
    CoplanaritySystem,
    Correspondence,
    build_system,
    solve_det_oracle,
)
from vertical_relpose.exceptions import (
    DegenerateConfigurationError,
    SelfTestError,
    TemplateMismatchError,
)
from vertical_relpose.macaulay import (
    BASIS_TEMPLATE,
    COMPACT_TEMPLATE,
    build_macaulay,
    eliminate_template,
)
from vertical_relpose.polynomials import ONE, TX, TY, TZ, Poly4, block_key, monomial
from vertical_relpose.simulation import SceneConfig, generate_scene
from vertical_relpose.solver import (
    EXPECTED_LEADING,
    QUOTIENT_BASIS,
    SolverOptions,
    action_matrix,
    eliminate_to_groebner,
    generic_form,
    minimal_generators,
    multiplication_matrix,
    normal_form,
    selftest,
    solve_correspondences,
    solve_system,
    solve_system_detailed,
    synthetic_samples,
)
from vertical_relpose.vertical import apply_vertical, r_ver_from_vanishing


def groebner(sys):
    return eliminate_to_groebner(build_macaulay(sys, BASIS_TEMPLATE))


def flip(s):
    return (-s[0], -s[1], -s[2], s[3])


def pure_translation_system():
    """R = I, T = (1, 0, 0): the true solutions have Tz = 0."""
    points = [np.array([0.2, -0.1, 2.0]), np.array([-0.4, 0.3, 1.5]), np.array([0.1, 0.5, 3.0])]
    return [Correspondence(X / X[2], X + [1.0, 0.0, 0.0]) for X in points]


def noisy_system(instance):
    """First three noisy correspondences aligned with the measured verticals."""
    R1 = r_ver_from_vanishing(instance.measured_vertical1)
    R2 = r_ver_from_vanishing(instance.measured_vertical2)
    return build_system([
        Correspondence(apply_vertical(R1, c.m1), apply_vertical(R2, c.m2))
        for c in instance.noisy_correspondences[:3]
    ])


class TestQuotientBasis:
    """Tests for the 12-element quotient basis"""

    def test_size_and_order(self):
        """1, t, ..., t^5, Tz, Tz*t, ..., Tz*t^5"""
        assert len(QUOTIENT_BASIS) == 12
        assert QUOTIENT_BASIS.monomials[0] == ONE
        assert QUOTIENT_BASIS.monomials[1] == monomial(t=1)
        assert QUOTIENT_BASIS.monomials[6] == monomial(tz=1)
        assert QUOTIENT_BASIS.monomials[11] == monomial(tz=1, t=5)

    def test_standard_monomials(self):
        """No basis element is divisible by a leading monomial"""
        for b in QUOTIENT_BASIS:
            for lead in EXPECTED_LEADING:
                assert not all(x <= y for x, y in zip(lead, b))


class TestMinimalGenerators:
    """Tests for minimal_generators"""

    def test_drops_multiples(self):
        """Multiples of another monomial are not generators"""
        gens = minimal_generators([TX, (1, 0, 0, 3), (0, 0, 2, 0), (0, 0, 2, 1), (2, 0, 0, 0)])
        assert set(gens) == {TX, (0, 0, 2, 0)}

    def test_block_order(self):
        """Generators come back in decreasing block order"""
        gens = minimal_generators(EXPECTED_LEADING)
        assert gens == sorted(gens, key=block_key, reverse=True)
        assert gens[0] == (0, 0, 2, 0)
        assert gens[-1] == (0, 0, 0, 6)

    def test_empty(self):
        """No monomials, no generators"""
        assert minimal_generators([]) == []


class TestGroebnerBasis:
    """Tests for eliminate_to_groebner"""

    def test_initial_ideal(self, minimal_system):
        """Leading monomials are Tx, Ty, Tz^2, t^6"""
        G = groebner(minimal_system)
        assert set(G.initial) == set(EXPECTED_LEADING)
        assert sorted(G.leading_monomials) == sorted(EXPECTED_LEADING)

    def test_initial_ideal_read_from_pivots(self, minimal_system):
        """The initial ideal is generated by the eliminated pivot monomials"""
        G = groebner(minimal_system)
        assert minimal_generators(G.template.pivot_monomials) == G.initial
        assert len(BASIS_TEMPLATE.columns) - G.template.rank == len(QUOTIENT_BASIS)

    def test_elements_are_pivot_rows(self, minimal_system):
        """Every element is the eliminated row holding its pivot"""
        G = groebner(minimal_system)
        elim = G.template
        for lead in EXPECTED_LEADING:
            r = elim.row_with_pivot(lead)
            assert G.element_with_leading(lead) == elim.row_poly(r)
            assert r in elim.changed_rows

    def test_elements_vanish_on_ground_truth(self, minimal_sample, minimal_system):
        """Every basis element vanishes at the generating solution"""
        _, truth = minimal_sample
        for g in groebner(minimal_system).elements:
            scale = max(1.0, max(abs(c) for c in g.terms.values()))
            assert abs(g.evaluate(truth)) < 1e-8 * scale

    def test_elements_are_monic(self, minimal_system):
        """Leading coefficients are one"""
        for g in groebner(minimal_system).elements:
            assert g.coefficient(g.leading_monomial(block_key)) == 1.0

    def test_tails_in_quotient_basis(self, minimal_system):
        """Only standard monomials follow the leading term"""
        G = groebner(minimal_system)
        for g, lead in zip(G.elements, EXPECTED_LEADING):
            assert all(m in QUOTIENT_BASIS for m in g.terms if m != lead)

    def test_coefficients_match_elements(self, minimal_system):
        """a, b, r and the univariate element are the element tails"""
        G = groebner(minimal_system)
        g_tx, g_ty, g_tz, g_t = G.elements
        for k in range(6):
            assert g_tx.coefficient((0, 0, 1, k)) == -G.a[k]
            assert g_ty.coefficient((0, 0, 1, k)) == -G.b[k]
            assert g_tz.coefficient((0, 0, 0, k)) == -G.r[k]
            assert g_t.coefficient((0, 0, 0, k)) == G.det_poly[k]
        assert G.det_poly[6] == 1.0
        assert G.condition >= 1.0

    def test_univariate_element_is_monic_determinant(self, minimal_system):
        """The t^6 element is det A(t) made monic"""
        from vertical_relpose.coplanarity import determinant_polynomial
        det = determinant_polynomial(minimal_system.translation_matrix())
        G = groebner(minimal_system)
        np.testing.assert_allclose(G.det_poly, det / det[6], rtol=1e-7, atol=1e-8)

    def test_scale_invariance(self, minimal_system):
        """Scaling f2..f4 by 7 gives the same monic basis"""
        s = minimal_system
        scaled = CoplanaritySystem(s.f1, s.f2.scale(7.0), s.f3.scale(7.0), s.f4.scale(7.0))
        G, H = groebner(s), groebner(scaled)
        for name in ("a", "b", "r", "det_poly"):
            np.testing.assert_allclose(getattr(H, name), getattr(G, name), rtol=1e-7, atol=1e-8)

    def test_column_order_is_normalised(self, minimal_system):
        """A DRL-sorted copy of the template gives the same basis"""
        drl = replace(BASIS_TEMPLATE, name="basis-drl", order="drl")
        G = groebner(minimal_system)
        H = eliminate_to_groebner(build_macaulay(minimal_system, drl))
        np.testing.assert_allclose(H.a, G.a, rtol=1e-7, atol=1e-8)
        np.testing.assert_allclose(H.det_poly, G.det_poly, rtol=1e-7, atol=1e-8)

    def test_basis_follows_elimination(self, minimal_system, monkeypatch):
        """Altering the eliminated rows alters the basis"""
        G = groebner(minimal_system)
        tz_columns = [BASIS_TEMPLATE.columns.index((0, 0, 1, k)) for k in range(6)]

        def scaled_elimination(M, *args, **kwargs):
            elim = eliminate_template(M, *args, **kwargs)
            elim.reduced[:, tz_columns] *= 2.0
            return elim

        monkeypatch.setattr(solver, "eliminate_template", scaled_elimination)
        H = groebner(minimal_system)
        np.testing.assert_allclose(H.a, 2.0 * G.a, rtol=1e-12)
        np.testing.assert_allclose(H.b, 2.0 * G.b, rtol=1e-12)

    def test_compact_template_cannot_hold_basis(self, minimal_system):
        """The 65-product template has no t^6 column"""
        with pytest.raises(TemplateMismatchError):
            eliminate_to_groebner(build_macaulay(minimal_system, COMPACT_TEMPLATE))

    def test_identical_correspondences(self):
        """Identical correspondences are degenerate and report a rank"""
        c = Correspondence([0.1, 0.2, 1.0], [0.3, -0.1, 1.0])
        with pytest.raises(DegenerateConfigurationError) as exc_info:
            groebner(build_system([c, c, c]))
        assert exc_info.value.rank is not None

    def test_zero_coplanarity_polynomials(self, minimal_system):
        """f2 = f3 = f4 = 0 cannot reach the expected initial ideal"""
        sys = CoplanaritySystem(minimal_system.f1, Poly4(), Poly4(), Poly4())
        with pytest.raises(DegenerateConfigurationError):
            groebner(sys)

    def test_solution_with_zero_tz(self):
        """Tx and Ty have no expression over Tz when a real root has Tz = 0"""
        with pytest.raises(DegenerateConfigurationError):
            groebner(build_system(pure_translation_system()))


class TestNormalForm:
    """Tests for normal_form"""

    def test_basis_elements_are_reduced(self, minimal_system):
        """Quotient basis monomials are their own normal form"""
        G = groebner(minimal_system)
        for b in QUOTIENT_BASIS:
            assert normal_form(Poly4({b: 1.0}), G.elements) == Poly4({b: 1.0})

    def test_basis_reduces_to_zero(self, minimal_system):
        """Each Gröbner element has normal form zero"""
        G = groebner(minimal_system)
        for g in G.elements:
            nf = normal_form(g, G.elements)
            assert all(abs(c) < 1e-12 for c in nf.terms.values())

    def test_preserves_value_on_variety(self, minimal_sample, minimal_system):
        """f and NF(f) agree at a solution"""
        _, truth = minimal_sample
        G = groebner(minimal_system)
        f = Poly4({monomial(tx=2, t=3): 1.0, monomial(ty=1, tz=1): -2.0, ONE: 0.5})
        assert normal_form(f, G.elements).evaluate(truth) == pytest.approx(
            f.evaluate(truth), abs=1e-6
        )


class TestActionMatrix:
    """Tests for action_matrix"""

    def test_constant_form_is_identity(self, minimal_system):
        """Multiplication by 1 is the identity"""
        G = groebner(minimal_system)
        np.testing.assert_allclose(action_matrix(G, form=[0, 0, 0, 0, 1]), np.eye(12))

    def test_t_shifts(self, minimal_system):
        """Multiplication by t shifts t^k and Tz*t^k for k < 5"""
        G = groebner(minimal_system)
        act = action_matrix(G, form=[0, 0, 0, 1])
        for j in list(range(5)) + list(range(6, 11)):
            expected = np.zeros(12)
            expected[j + 1] = 1.0
            np.testing.assert_allclose(act[:, j], expected, atol=1e-14)

    def test_t_wraps_with_determinant(self, minimal_system):
        """Column of t^5 holds the normal form of t^6"""
        G = groebner(minimal_system)
        act = action_matrix(G, form=[0, 0, 0, 1])
        np.testing.assert_allclose(act[:6, 5], -G.det_poly[:6], atol=1e-12)

    def test_t_eigenvalues_match_oracle(self, minimal_system):
        """Real eigenvalues of the t action are the oracle's t-roots"""
        G = groebner(minimal_system)
        eigenvalues = np.linalg.eigvals(action_matrix(G, form=[0, 0, 0, 1]))
        real = np.sort(eigenvalues.real[np.abs(eigenvalues.imag) < 1e-8])
        oracle = np.sort([s[3] for s in solve_det_oracle(minimal_system)])
        np.testing.assert_allclose(real, oracle, atol=1e-7)

    @pytest.mark.parametrize("form", [
        generic_form(),
        Poly4({TX: 1.0}),
        Poly4({TY: 1.0}),
        Poly4({TZ: 1.0}),
        Poly4({TX: 0.3, TZ: -0.7, monomial(t=1): 0.2, ONE: 1.5}),
    ], ids=["generic", "Tx", "Ty", "Tz", "mixed"])
    def test_matches_normal_form(self, minimal_system, form):
        """Assembled matrix equals column-by-column normal-form reduction"""
        G = groebner(minimal_system)
        reference = multiplication_matrix(G, form)
        scale = max(1.0, np.abs(reference).max())
        np.testing.assert_allclose(action_matrix(G, form=form), reference, atol=1e-9 * scale)

    def test_rejects_nonlinear_form(self, minimal_system):
        """Quadratic forms are not linear"""
        from vertical_relpose.exceptions import InvalidInputError
        G = groebner(minimal_system)
        with pytest.raises(InvalidInputError):
            action_matrix(G, form=Poly4({monomial(t=2): 1.0}))

    def test_eigenvectors_are_basis_evaluations(self, minimal_system):
        """Eigenvectors of act^T are the quotient basis at the solutions"""
        G = groebner(minimal_system)
        form = generic_form()
        coefs = np.array([form.coefficient(m) for m in (TX, TY, TZ, monomial(t=1))])
        w, V = eig(action_matrix(G, form=form).T)
        solutions = solve_system(minimal_system)
        assert solutions
        for s in solutions:
            value = float(coefs @ np.array(s))
            k = int(np.argmin(np.abs(w - value)))
            assert abs(w[k] - value) < 1e-8 * (1.0 + abs(value))
            v = V[:, k] / V[0, k]
            expected = QUOTIENT_BASIS.evaluate(s[2], s[3])
            np.testing.assert_allclose(v.real, expected, rtol=1e-6, atol=1e-9)
            assert np.abs(v.imag).max() < 1e-9

    def test_generic_form_is_fixed(self):
        """The generic form depends only on its seed"""
        assert generic_form(5) == generic_form(5)
        assert generic_form(5) != generic_form(6)


class TestSolveSystem:
    """Tests for solve_system"""

    def test_recovers_ground_truth(self, minimal_sample, minimal_system):
        """The generating solution is among the results"""
        _, truth = minimal_sample
        sols = np.array(solve_system(minimal_system))
        assert np.abs(sols - truth).max(axis=1).min() < 1e-8

    def test_sign_pairs(self, minimal_system):
        """Solutions come in +-T pairs"""
        sols = solve_system(minimal_system)
        assert len(sols) % 2 == 0
        arr = np.array(sols)
        for s in sols:
            assert np.abs(arr - flip(s)).max(axis=1).min() < 1e-8

    def test_action_route_on_generic_input(self, minimal_system):
        """Generic instances are solved from the action matrix"""
        outcome = solve_system_detailed(minimal_system)
        assert outcome.route == "action-matrix"
        assert outcome.reason is None
        assert outcome.basis is not None

    def test_pure_translation(self):
        """R = I, T = (1, 0, 0) is recovered through det A(t)"""
        outcome = solve_system_detailed(build_system(pure_translation_system()))
        assert outcome.route == "determinant"
        assert outcome.reason
        sols = np.array(outcome.solutions)
        for target in [(1.0, 0.0, 0.0, 0.0), (-1.0, 0.0, 0.0, 0.0)]:
            assert np.abs(sols - target).max(axis=1).min() < 1e-8

    def test_pure_translation_without_fallback(self):
        """With the fallback off the elimination failure is raised"""
        sys = build_system(pure_translation_system())
        with pytest.raises(DegenerateConfigurationError):
            solve_system(sys, SolverOptions(fallback=False))
        assert solve_correspondences(pure_translation_system())

    def test_matches_oracle(self, rng, matching_error):
        """Solution sets agree with the determinant oracle on exact data"""
        for _ in range(100):
            samples, _ = synthetic_samples(rng)
            sys = build_system(samples)
            assert matching_error(solve_system(sys), solve_det_oracle(sys)) < 1e-8

    @pytest.mark.parametrize("sigma", [0.5, 1.0])
    def test_matches_oracle_with_noise(self, sigma, matching_error):
        """Solution sets agree with the oracle on noisy correspondences"""
        cfg = SceneConfig(sigma=sigma, seed=17)
        for k in range(50):
            sys = noisy_system(generate_scene(cfg, k))
            assert matching_error(solve_system(sys), solve_det_oracle(sys)) < 1e-8

    def test_action_route_share(self, rng):
        """At least 98% of random instances use the action matrix"""
        routes = []
        for _ in range(200):
            samples, _ = synthetic_samples(rng)
            routes.append(solve_system_detailed(build_system(samples)).route)
        assert routes.count("action-matrix") >= 196

    def test_solution_properties(self, rng):
        """At most 12 unit-norm solutions with tiny residuals"""
        for _ in range(50):
            samples, _ = synthetic_samples(rng)
            sys = build_system(samples)
            sols = solve_system(sys)
            assert len(sols) <= 12
            for s in sols:
                assert np.linalg.norm(s[:3]) == pytest.approx(1.0, abs=1e-12)
                assert sys.residuals(s).max() <= 1e-6

    def test_sorted_and_deterministic(self, minimal_system):
        """Repeated solves return the same sorted list"""
        first = solve_system(minimal_system)
        assert first == solve_system(minimal_system)
        assert first == sorted(first, key=lambda s: (s[3], s[0], s[1], s[2]))

    def test_form_seed_independence(self, minimal_system, matching_error):
        """Another generic form gives the same solutions"""
        a = solve_system(minimal_system)
        b = solve_system(minimal_system, SolverOptions(form_seed=7))
        assert matching_error(a, b) < 1e-8

    def test_determinant_route(self, minimal_system, matching_error):
        """Forcing the det A(t) route changes nothing on good input"""
        a = solve_system(minimal_system)
        outcome = solve_system_detailed(minimal_system, SolverOptions(cond_limit=0.0))
        assert outcome.route == "determinant"
        assert matching_error(a, outcome.solutions) < 1e-8

    def test_eigensolver_failure_falls_back(self, minimal_system, matching_error, monkeypatch):
        """A failed eigendecomposition is solved through det A(t)"""
        expected = solve_system(minimal_system)

        def failing_eig(*args, **kwargs):
            raise LinAlgError("eig did not converge")

        monkeypatch.setattr(solver, "eig", failing_eig)
        outcome = solve_system_detailed(minimal_system)
        assert outcome.route == "determinant"
        assert "eigendecomposition" in outcome.reason
        assert matching_error(expected, outcome.solutions) < 1e-8

    def test_lost_solutions_fall_back(self, minimal_system, matching_error, monkeypatch):
        """Fewer read-offs than real roots of det A(t) trigger the fallback"""
        expected = solve_system(minimal_system)
        read_off = solver._read_off
        monkeypatch.setattr(solver, "_read_off", lambda *a: read_off(*a)[1:])
        outcome = solve_system_detailed(minimal_system)
        assert outcome.route == "determinant"
        assert matching_error(expected, outcome.solutions) < 1e-8

    def test_degenerate_determinant(self):
        """Identical correspondences have no isolated solutions"""
        c = Correspondence([0.1, 0.2, 1.0], [0.3, -0.1, 1.0])
        with pytest.raises(DegenerateConfigurationError):
            solve_system(build_system([c, c, c]))


@pytest.mark.slow
class TestStructuralFacts:
    """Structural facts over many random instances"""

    def test_thousand_instances(self):
        """65x77 template, initial ideal <Tx, Ty, Tz^2, t^6>, 12 standard monomials"""
        rng = np.random.default_rng(2024)
        for _ in range(1000):
            samples, _ = synthetic_samples(rng)
            sys = build_system(samples)
            assert build_macaulay(sys, COMPACT_TEMPLATE).shape == (65, 77)
            elim = eliminate_template(build_macaulay(sys, BASIS_TEMPLATE))
            assert set(minimal_generators(elim.pivot_monomials)) == set(EXPECTED_LEADING)
            assert len(BASIS_TEMPLATE.columns) - elim.rank == 12
            assert len(solve_system(sys)) <= 12

    def test_thousand_instances_match_oracle(self, matching_error):
        """Oracle equivalence with and without noise"""
        rng = np.random.default_rng(7)
        for _ in range(1000):
            samples, _ = synthetic_samples(rng)
            sys = build_system(samples)
            assert matching_error(solve_system(sys), solve_det_oracle(sys)) < 1e-8
        cfg = SceneConfig(sigma=1.0, seed=23)
        for k in range(300):
            sys = noisy_system(generate_scene(cfg, k))
            assert matching_error(solve_system(sys), solve_det_oracle(sys)) < 1e-8


class TestSelfTest:
    """Tests for selftest"""

    def test_passes(self):
        """Built-in instance satisfies every structural fact"""
        report = selftest(seed=0, repeats=3)
        assert report.passed
        assert report.failures() == []
        assert [f.name for f in report.facts] == [
            "max template degree",
            "Macaulay matrix shape",
            "initial ideal",
            "quotient dimension",
            "action matrix",
        ]

    def test_report_fields(self):
        """Report carries ranks, route, solution count and timing"""
        report = selftest(seed=3, repeats=2, strict=True)
        assert 0 < report.rank <= 65
        assert report.basis_rank == 58
        assert 0 < report.full_rank <= 175
        assert report.route == "action-matrix"
        assert 0 < report.solutions <= 12
        assert report.mean_solve_us > 0
        assert report.repeats == 2
        assert report.within_time_budget == (report.mean_solve_us <= report.time_budget_us)

    def test_initial_ideal_is_observed(self, monkeypatch):
        """A template that cannot reach the basis fails the initial-ideal fact"""
        monkeypatch.setattr(solver, "BASIS_TEMPLATE", COMPACT_TEMPLATE)
        report = selftest(seed=0, repeats=1)
        failed = {f.name for f in report.failures()}
        assert "initial ideal" in failed
        assert "action matrix" in failed
        assert report.route == "determinant"
        with pytest.raises(SelfTestError):
            selftest(seed=0, repeats=1, strict=True)

    def test_deterministic_facts(self):
        """Same seed, same facts"""
        a, b = selftest(seed=5, repeats=1), selftest(seed=5, repeats=1)
        assert a.facts == b.facts
        assert (a.rank, a.basis_rank, a.full_rank) == (b.rank, b.basis_rank, b.full_rank)

    def test_error_type(self):
        """SelfTestError belongs to the package hierarchy"""
        from vertical_relpose.exceptions import VerticalRelposeError
        assert issubclass(SelfTestError, VerticalRelposeError)
