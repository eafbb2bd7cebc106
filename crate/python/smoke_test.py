"""Smoke test for the cubezeta extension module.

Build first with `cargo build -p cubezeta-python`. The script copies the built
shared library next to a temporary package path and imports it.
"""

import json
import os
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load():
    profile = os.environ.get("CUBEZETA_PROFILE", "debug")
    lib_dir = ROOT / "target" / profile
    candidates = [lib_dir / name for name in ("libcubezeta.so", "libcubezeta.dylib", "cubezeta.dll")]
    built = next((p for p in candidates if p.exists()), None)
    if built is None:
        sys.exit(f"no built extension in {lib_dir}; run cargo build -p cubezeta-python")
    tmp = Path(tempfile.mkdtemp(prefix="cubezeta-"))
    suffix = ".pyd" if built.suffix == ".dll" else ".so"
    shutil.copy(built, tmp / f"cubezeta{suffix}")
    sys.path.insert(0, str(tmp))
    import cubezeta

    return cubezeta


def main():
    cz = load()

    cube = cz.Cube([1, 1, 0, 1, 1, 0, 1, -1])
    assert cube.invariants() == (5, 1, 1)
    assert cube.forms()[0] == (1, 1, -1)
    assert cube.is_semistable()
    assert cube.act([("f3", ((1, 1), (0, 1)))]).entries() == [1, 2, 0, 1, 2, -1, 1, -1]
    assert cube.act([("f1", 2), ("f2", -1)]).canonical_form() == cube.canonical_form()
    assert cube.stabilizer_trivial()
    assert cube.ideal_class_pair() == (5, (1, 1), (1, 1))
    assert cz.Cube.parse(str(cube)) == cube

    assert cz.sqrt_count(9, 27) == 6
    assert cz.chi(5, 2) == -1
    assert cz.orbit_count(45, 3, 3) == 16
    assert cz.orbit_count_oracle(9, 3, 3) == (16, True)
    [(xyst, built)] = cz.congruence_pairs(5, 1, 1)
    assert xyst[:2] == (1, 1) and built.invariants() == (5, 1, 1)
    assert cz.a_coeff3(25, 5, 5) == 5
    assert cz.thm44_check(8)
    coeffs = dict(cz.ppart(2))
    assert coeffs[(0, 0, 0)] == [1]
    assert cz.fiber_count(45, 3, 3) == 4
    assert len(cz.moduli(45, 3, 3)) == 4

    assert json.loads(cz.verify("prop25", 5, variant="corrected"))["status"] == "pass"
    assert json.loads(cz.verify("prop25", 5))["status"] == "fail"
    assert json.loads(cz.verify("thm13", 45, a1=3, a2=3))["status"] == "pass"

    value, converges = cz.partial_sum(2.0, 2.0, 2.0, 20, 5)
    assert value > 0 and converges

    try:
        cz.orbit_count(5, 0, 1)
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError")

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
