import numpy as np
import pytest

from affine_loophole.qstate import random_density, random_unitary


def pytest_configure(config):
    np.set_printoptions(precision=6, suppress=True)


@pytest.fixture
def random_states():
    def make(n_qubits, count, offset=0):
        return [random_density(1000 * n_qubits + offset + i, n_qubits) for i in range(count)]

    return make


@pytest.fixture
def random_gates():
    def make(n_qubits, count, offset=0):
        return [random_unitary(7000 + offset + i, n_qubits) for i in range(count)]

    return make


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_record():
    def record(number, title, ok, detail=""):
        ACCEPTANCE_LINES.append((number, f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} {detail}".rstrip()))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
