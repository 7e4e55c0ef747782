"""Link catalog: closed forms, derivative consistency, monotonicity,
inversion, and construction invariants."""

import numpy as np
import pytest

from selmatch.config import link_from_mapping, spec_to_mapping
from selmatch.errors import ConfigError, NonInjectiveLink, OutOfRange
from selmatch.links import (
    LinkSpec,
    ScoreDomain,
    link_breakpoints,
    link_eval,
    link_inverse,
    link_primitive,
    link_value,
)

from conftest import LINK_SPECS, LINK_SPECS_SHIFTED, STRICT_LINKS, away_from_breakpoints, central_diff

DOMAIN = ScoreDomain(-5.0, 5.0)


class TestClosedForms:
    def test_sigmoid_at_origin(self):
        ev = link_eval(LinkSpec("sigmoid"), 0.0)
        assert ev.h == 0.5
        assert ev.H == pytest.approx(np.log(2.0), abs=1e-15)
        assert ev.h_slope == 0.25

    def test_smelu_anchor_points(self):
        spec = LinkSpec("smelu_grad", extra={"c": 1.0})
        assert link_eval(spec, -1.0)[:2] == (0.0, 0.0)
        assert link_eval(spec, 0.0)[:2] == (0.5, 0.25)
        assert link_eval(spec, 1.0)[:2] == (1.0, 1.0)

    def test_identity(self):
        ev = link_eval(LinkSpec("identity"), 3.0)
        assert ev == (3.0, 4.5, 1.0)

    def test_sigmoid_primitive_normalization(self):
        # H carries the 1/alpha outer factor of the Softplus closed form.
        spec = LinkSpec("sigmoid", alpha=2.0, beta=1.0)
        z = 1.7
        expected = np.log1p(np.exp(2.0 * (z - 1.0))) / 2.0
        assert link_eval(spec, z).H == pytest.approx(expected, rel=1e-14)

    def test_huber_matches_scaled_clip(self):
        spec = LinkSpec("huber_grad", extra={"threshold": 0.5})
        for z in (-2.0, -0.3, 0.2, 1.5):
            assert link_eval(spec, z).h == pytest.approx(
                np.clip(z, -0.5, 0.5) / 0.5, abs=1e-15)

    def test_exponent_clamp_saturates_finite(self):
        for family in ("exponential", "anti_exponential", "sinh"):
            ev = link_eval(LinkSpec(family), 1e3)
            assert np.isfinite(ev.h) and np.isfinite(ev.H) and np.isfinite(ev.h_slope)

    def test_non_finite_score_rejected(self):
        with pytest.raises(OutOfRange):
            link_eval(LinkSpec("sigmoid"), float("nan"))


class TestDerivativeConsistency:
    @pytest.mark.parametrize("name", sorted(LINK_SPECS))
    @pytest.mark.parametrize("catalog", [LINK_SPECS, LINK_SPECS_SHIFTED])
    def test_primitive_and_slope_match_finite_differences(self, name, catalog, rng):
        spec = catalog[name]
        zs = away_from_breakpoints(rng, spec, 200)
        eps = 1e-6

        fd_h = central_diff(lambda z: link_primitive(spec, z), zs, eps)
        h = link_value(spec, zs)
        np.testing.assert_allclose(fd_h, h, rtol=1e-6, atol=1e-9)

        fd_slope = central_diff(lambda z: link_value(spec, z), zs, eps)
        slope = np.array([link_eval(spec, z).h_slope for z in zs])
        np.testing.assert_allclose(fd_slope, slope, rtol=1e-5, atol=1e-7)

    @pytest.mark.parametrize("name", sorted(LINK_SPECS))
    def test_monotone_non_decreasing(self, name, rng):
        spec = LINK_SPECS[name]
        z = np.sort(rng.uniform(-5, 5, size=500))
        h = link_value(spec, z)
        assert np.all(np.diff(h) >= -1e-12)


class TestInverse:
    def test_sigmoid_half(self):
        assert link_inverse(LinkSpec("sigmoid"), 0.5, DOMAIN) == pytest.approx(0.0, abs=1e-10)

    def test_identity_affine(self):
        spec = LinkSpec("identity", alpha=2.0, beta=1.0)
        assert link_inverse(spec, 4.0, DOMAIN) == pytest.approx(3.0, abs=1e-10)

    def test_sinh_against_arcsinh(self):
        # Bisection root cross-checked against the builtin inverse.
        y = float(np.sinh(1.0))
        z = link_inverse(LinkSpec("sinh"), y, DOMAIN)
        assert z == pytest.approx(np.arcsinh(y), abs=1e-10)
        assert z == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("name", sorted(STRICT_LINKS))
    def test_round_trip(self, name, rng):
        spec = STRICT_LINKS[name]
        for z in rng.uniform(-4.5, 4.5, size=25):
            y = float(link_value(spec, z))
            assert link_inverse(spec, y, DOMAIN) == pytest.approx(z, abs=1e-8)

    def test_flat_segment_raises(self):
        spec = LinkSpec("smelu_grad", extra={"c": 1.0})
        with pytest.raises(NonInjectiveLink):
            link_inverse(spec, 1.0, DOMAIN)

    def test_out_of_image_raises(self):
        with pytest.raises(OutOfRange):
            link_inverse(LinkSpec("sigmoid"), 2.0, DOMAIN)

    def test_jump_gap_raises(self):
        # sign jumps from -1 to 1; intermediate values are not attained.
        with pytest.raises(OutOfRange):
            link_inverse(LinkSpec("sign"), 0.3, DOMAIN)


class TestConstruction:
    def test_alpha_must_be_positive(self):
        with pytest.raises(ValueError):
            LinkSpec("sigmoid", alpha=0.0)

    def test_unknown_family(self):
        with pytest.raises(ValueError):
            LinkSpec("logit")

    def test_smelu_width_positive(self):
        with pytest.raises(ValueError):
            LinkSpec("smelu_grad", extra={"c": -1.0})

    def test_staircase_invariants(self):
        with pytest.raises(ValueError):
            LinkSpec("staircase", extra={"breakpoints": [1.0, 0.0], "levels": [0, 1, 2]})
        with pytest.raises(ValueError):
            LinkSpec("staircase", extra={"breakpoints": [0.0, 1.0], "levels": [0, 2, 1]})
        with pytest.raises(ValueError):
            LinkSpec("staircase", extra={"breakpoints": [0.0], "levels": [0.0]})

    def test_unknown_extra_key_rejected(self):
        with pytest.raises(ValueError, match="width"):
            LinkSpec("smelu_grad", extra={"width": 1.0})

    def test_breakpoints_in_score_space(self):
        spec = LinkSpec("smelu_grad", alpha=2.0, beta=1.0, extra={"c": 1.0})
        assert link_breakpoints(spec) == (0.5, 1.5)


class TestSerialization:
    @pytest.mark.parametrize("name", sorted(LINK_SPECS_SHIFTED))
    def test_config_round_trip(self, name):
        spec = LINK_SPECS_SHIFTED[name]
        doc = spec_to_mapping(spec)
        again = link_from_mapping(doc["link"])
        assert again == spec

    def test_unknown_key_names_the_key(self):
        with pytest.raises(ConfigError, match="alfa"):
            link_from_mapping({"family": "sigmoid", "alfa": 2.0})
