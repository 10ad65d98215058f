import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sscfkit.spectral import SubbandSpec  # noqa: E402
from sscfkit.synth import TransitionSpec, preset, synth_transition  # noqa: E402

# Bands wide enough that each preset formant stays in one band over a whole
# glide (the default mel bands split F2 of /i/ from F2 of /a/).
FORMANT_BANDS = (
    SubbandSpec(0, 0.0, 250.0),
    SubbandSpec(1, 250.0, 1000.0),
    SubbandSpec(2, 1000.0, 2500.0),
    SubbandSpec(3, 2500.0, 4000.0),
    SubbandSpec(4, 4000.0, 6000.0),
    SubbandSpec(5, 6000.0, 8000.0),
)

VOWEL_PAIRS = [("a", "i"), ("a", "u"), ("i", "u"), ("e", "o"), ("a", "e")]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def vv_token(start, end, duration_s=0.3, hold_s=0.05, speaker="male", scale=1.0, **kw):
    """Vowel-to-vowel token with steady targets at both ends."""
    v0 = preset(start, speaker).scaled(scale, scale)
    v1 = preset(end, speaker).scaled(scale, scale)
    return synth_transition(TransitionSpec(v0, v1, duration_s, hold_s=hold_s), **kw)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.report_lines():
        terminalreporter.write_line(line)
