import numpy as np
import pytest

TINY_CONFIG = """\
layout:
  x_left: 0.0
  width: 0.96
  y_bottom: 0.0
  top:    {columns: 24, dx: 0.04, height: 0.32}
  bottom: {columns: 12, dx: 0.08, height: 0.64}
medium:
  kind: two_layer_constant
  split_y: 0.64
  top:    {rho: 0.5, c: 1.0}
  bottom: {rho: 1.0, c: 2.0}
time: {dt: 0.004, n_steps: 50}
sources:
  - {x: 0.2, y: 0.8, wavelet: ricker, f0: 2.0, t0: 0.2, amplitude: 1.0}
receivers:
  - {x: 0.76, y: 0.8}
outputs: {seismogram: true, energy: true}
seed: 7
"""


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


@pytest.fixture
def tiny_config_text():
    return TINY_CONFIG
