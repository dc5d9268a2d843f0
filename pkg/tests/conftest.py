import numpy as np
import pytest

from rbcom.signal import RealSignal, SampledEnvelope

FS = 200e9

_acceptance = []


def envelope(samples, fs=FS, fc=282e12):
    return SampledEnvelope(np.asarray(samples, dtype=complex), fs, fc)


def real(samples, fs=FS):
    return RealSignal(np.asarray(samples, dtype=float), fs)


def tone(freq_hz, n, fs=FS, amplitude=1.0):
    t = np.arange(n) / fs
    return amplitude * np.exp(2j * np.pi * freq_hz * t)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_runtest_logreport(report):
    if report.when == "call" and "acceptance" in report.keywords:
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance:
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
