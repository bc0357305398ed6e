"""Shared strategies and small fixed networks for the test modules."""

import numpy as np
from hypothesis import strategies as st

from pathnorm.netcore import ResNetArch, ResNetParams


def hand_net():
    return ResNetParams(ResNetArch(2, 2, 1, 1), np.eye(2), np.ones((1, 1, 2)), np.ones((1, 2, 1)), np.ones(2))


def const_net(value, d=2, L=1, m=1):
    """Network computing the constant ``value`` through the bias coordinate."""
    arch = ResNetArch(d, 1, m, L)
    V = np.zeros((1, d))
    V[0, 0] = 1.0
    return ResNetParams(arch, V, np.zeros((L, m, 1)), np.zeros((L, 1, m)), np.array([value]))


arch_st = st.builds(
    ResNetArch,
    st.integers(1, 4),
    st.integers(1, 5),
    st.integers(1, 4),
    st.integers(1, 4),
)


@st.composite
def nets(draw, scale=1.0):
    arch = draw(arch_st)
    seed = draw(st.integers(0, 2**32 - 1))
    return ResNetParams.random(arch, np.random.default_rng(seed), scale)
