import json
import os
import subprocess
import sys

from speciation import _kernels

SNIPPET = """
import json
from speciation import _kernels, preset_scheme, solve
st = solve(preset_scheme("tris-borate"), {"B": 0.2, "T": 0.2})
print(json.dumps({"numba": _kernels.USE_NUMBA, "pH": st.pH, "xi": list(st.xi)}))
"""


def run(flag):
    env = dict(os.environ, SPECIATION_DISABLE_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", SNIPPET], env=env, capture_output=True,
                         text=True, check=True).stdout
    return json.loads(out.strip().splitlines()[-1])


def test_numpy_fallback_matches_numba():
    slow = run("1")
    fast = run("0")
    assert slow["numba"] is False
    assert abs(slow["pH"] - fast["pH"]) < 1e-12
    for a, b in zip(slow["xi"], fast["xi"]):
        assert abs(a - b) <= 1e-12 * abs(a)


def test_status_codes_distinct():
    codes = {_kernels.CONVERGED, _kernels.MAX_ITER, _kernels.LINE_SEARCH_FAILED,
             _kernels.SINGULAR}
    assert len(codes) == 4
