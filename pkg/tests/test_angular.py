import math
from dataclasses import replace

import numpy as np
import pytest

from fluorspec.angular import (DEFAULT_FAMILY, PROFILE_FAMILIES,
                               build_profiles, integrate_solid_angle,
                               sigma_angular)
from fluorspec.linalg import integrate_adaptive
from fluorspec.model import ModelParams
from fluorspec.spectrum import sigma_total


def _induced_gram(profiles, eps_a, eps_b, tol=1e-11):
    def component(selector):
        def f(theta):
            a = profiles.amplitude(eps_a, theta, +1).conjugate() \
                * profiles.amplitude(eps_b, theta, +1)
            b = profiles.amplitude(eps_a, theta, -1).conjugate() \
                * profiles.amplitude(eps_b, theta, -1)
            return 2.0 * math.pi * math.sin(theta) * selector(a + b)
        return integrate_adaptive(f, 0.0, math.pi, tol)
    return complex(component(lambda v: v.real), component(lambda v: v.imag))


def test_empty_profiles_without_scattering(usual):
    profiles = build_profiles(usual)
    assert profiles.axes == ()
    assert profiles.amplitude(+1, 1.0, +1) == 0j


@pytest.mark.parametrize("family", sorted(PROFILE_FAMILIES))
def test_profiles_reproduce_gram_data(modified, family):
    profiles = build_profiles(modified, family)
    assert abs(_induced_gram(profiles, +1, +1)
               - modified.g_plus_norm2) <= 1e-8
    assert abs(_induced_gram(profiles, -1, -1)
               - modified.g_minus_norm2) <= 1e-8
    assert abs(_induced_gram(profiles, +1, -1) - modified.g_inner) <= 1e-8


@pytest.mark.parametrize("family", sorted(PROFILE_FAMILIES))
def test_profiles_satisfy_dipole_constraint(modified, family):
    profiles = build_profiles(modified, family)
    assert profiles.constraint_residual(+1) <= 1e-10
    assert profiles.constraint_residual(-1) <= 1e-10


def test_unknown_family_rejected(modified):
    with pytest.raises(ValueError, match="unknown profile family"):
        build_profiles(modified, "nope")


def test_factorization_without_scattering(usual):
    p = replace(usual, y=1.0)
    profiles = build_profiles(p)
    x = 1.3
    total = sigma_total(p, x)
    for theta in (0.9, math.pi / 2, 2.4):
        for pol, sign in ((+1, 1.0), (-1, -1.0)):
            expected = (3.0 / (8.0 * math.pi)
                        * ((1.0 + sign * math.cos(theta)) / 2.0) ** 2 * total)
            assert abs(sigma_angular(p, profiles, x, theta, pol)
                       - expected) <= 1e-12


def test_backward_right_circular_channel_dark(usual):
    p = replace(usual, y=1.0)
    profiles = build_profiles(p)
    assert sigma_angular(p, profiles, 0.5, math.pi, +1) == 0.0


def test_equator_channels_equal_without_scattering(usual):
    p = replace(usual, y=1.0)
    profiles = build_profiles(p)
    plus = sigma_angular(p, profiles, 0.8, math.pi / 2, +1)
    minus = sigma_angular(p, profiles, 0.8, math.pi / 2, -1)
    assert plus == pytest.approx(minus, abs=1e-15)


def test_theta_and_pol_domain(usual):
    profiles = build_profiles(usual)
    with pytest.raises(ValueError):
        sigma_angular(usual, profiles, 0.0, 0.0, +1)
    with pytest.raises(ValueError):
        sigma_angular(usual, profiles, 0.0, 3.5, +1)
    with pytest.raises(ValueError):
        sigma_angular(usual, profiles, 0.0, 1.0, 0)


def test_positivity_pointwise(modified):
    p = replace(modified, y=1.0)
    profiles = build_profiles(p)
    for theta in np.linspace(0.2, math.pi, 7):
        for x in (-7.0, 0.0, 5.0):
            for pol in (+1, -1):
                assert sigma_angular(p, profiles, x, float(theta),
                                     pol) >= -1e-10


def test_solid_angle_closure_without_scattering(usual):
    p = replace(usual, y=1.0)
    profiles = build_profiles(p)
    for x in (0.0, 4.2):
        assert abs(integrate_solid_angle(p, profiles, x)
                   - sigma_total(p, x)) <= 1e-8


@pytest.mark.parametrize("family", sorted(PROFILE_FAMILIES))
def test_solid_angle_closure_modified(modified, family):
    p = replace(modified, y=1.0)
    profiles = build_profiles(p, family)
    for x in (0.0, 3.7):
        assert abs(integrate_solid_angle(p, profiles, x)
                   - sigma_total(p, x)) <= 1e-6


def test_solid_angle_zero_without_drive():
    p = ModelParams(gamma=0.6, omega2=0.0, z=0.0, y=0.5)
    profiles = build_profiles(p)
    assert integrate_solid_angle(p, profiles, 1.0) == 0.0


def test_default_family_is_registered():
    assert DEFAULT_FAMILY in PROFILE_FAMILIES
