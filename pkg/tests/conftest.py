import numpy as np
import pytest

from depthnormal import CameraIntrinsics, SceneSpec, generate
from depthnormal._jit import HAVE_NUMBA

BACKENDS = ["numpy"] + (["numba"] if HAVE_NUMBA else [])

VGA = CameraIntrinsics(525.0, 525.0, 319.5, 239.5)
QQVGA = CameraIntrinsics(130.0, 130.0, 79.5, 59.5)


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


@pytest.fixture
def small_cam():
    return QQVGA


def tilted_normal(tilt_deg, azimuth_deg):
    t, a = np.deg2rad(tilt_deg), np.deg2rad(azimuth_deg)
    return [np.sin(t) * np.cos(a), np.sin(t) * np.sin(a), -np.cos(t)]


def random_plane_spec(rng, intr=VGA, size=(640, 480), max_tilt=45.0):
    normal = tilted_normal(rng.uniform(0, max_tilt), rng.uniform(0, 360))
    return SceneSpec("plane", size[0], size[1], intr,
                     {"normal": normal, "offset": float(rng.uniform(1.0, 5.0))})


def plane_scene(intr=QQVGA, size=(160, 120), normal=(0.3, -0.2, -1.0), offset=2.5):
    return generate(SceneSpec("plane", size[0], size[1], intr, {"normal": list(normal), "offset": offset}))


_acceptance = {}


@pytest.fixture
def criterion(request):
    """Record an acceptance verdict; the terminal summary prints one line per criterion."""
    name = request.node.name

    def record(label, detail=""):
        _acceptance[name] = (label, detail, None)
        return lambda ok, info="": _acceptance.__setitem__(name, (label, info or detail, bool(ok)))

    yield record
    label, detail, ok = _acceptance.get(name, (name, "", None))
    failed = request.node.rep_call.failed if hasattr(request.node, "rep_call") else True
    _acceptance[name] = (label, detail, not failed if ok is None else ok and not failed)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for label, detail, ok in sorted(_acceptance.values()):
        verdict = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"{verdict}  {label}  {detail}")
